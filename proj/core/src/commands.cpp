#include "collcal/commands.hpp"

#include "collcal/errors.hpp"
#include "collcal/rng.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <sstream>

namespace collcal {

std::string_view version_string() noexcept { return COLLCAL_VERSION_STRING; }

namespace {

RotationMatrix euler_rotation(const EulerAnglesXYZ& e) { return euler_xyz_to_matrix(e); }

std::vector<std::string> matrix_values(const Mat3& m) {
  std::vector<std::string> out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.push_back(format_double(m(r, c)));
  return out;
}

void add_header(Report& r, std::string_view command, std::uint64_t seed,
                const std::vector<InputDigest>& inputs) {
  r.add("tool", std::vector<std::string>{"collcal", std::string(version_string())});
  r.add("command", std::vector<std::string>{std::string(command)});
  r.add("seed", std::vector<std::string>{std::to_string(seed)});
  for (const auto& in : inputs) r.add("input", std::vector<std::string>{in.role, in.value});
}

void add_pose(Report& r, const PoseRT& pose) {
  r.add("rotation", matrix_values(pose.rotation));
  const AxisAngle rv = matrix_to_axis_angle(pose.rotation);
  r.add("rotation_vector", {rv.x(), rv.y(), rv.z()});
  r.add("translation", {pose.translation.x(), pose.translation.y(), pose.translation.z()});
}

void add_solver(Report& r, const LMSummary& s) {
  r.add("solver", std::vector<std::string>{std::string(to_string(s.status)), std::to_string(s.iterations),
                                           std::to_string(s.accepted_steps), format_double(s.initial_cost),
                                           format_double(s.final_cost), format_double(s.final_gradient_norm)});
}

ErrorStats stats_of(const std::vector<double>& abs_diffs) {
  ErrorStats s;
  if (abs_diffs.empty()) return s;
  double sum = 0.0;
  for (double v : abs_diffs) sum += v;
  s.mean_abs_deg = sum / static_cast<double>(abs_diffs.size());
  if (abs_diffs.size() > 1) {
    double ss = 0.0;
    for (double v : abs_diffs) ss += (v - s.mean_abs_deg) * (v - s.mean_abs_deg);
    s.std_deg = std::sqrt(ss / static_cast<double>(abs_diffs.size() - 1));
  }
  return s;
}

double reduction(double nominal, double calibrated) {
  return nominal > 0.0 ? 1.0 - calibrated / nominal : 0.0;
}

// Angle difference folded into (-180, 180].
double angle_diff(double a, double b) {
  double d = std::fmod(a - b, 360.0);
  if (d > 180.0) d -= 360.0;
  if (d <= -180.0) d += 360.0;
  return d;
}

SimulationConfig load_config(const RunOptions& opt) {
  if (!opt.config) return {};
  return simulation_config(parse_config(read_file(*opt.config)));
}

void ensure_output(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

}  // namespace

// ---------------------------------------------------------------- in memory

SimulationOutput simulate(const SimulationConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  RigScenario rig;
  rig.true_camera = cfg.test;
  rig.true_pose = collimator_pose(euler_rotation(cfg.test_euler_deg), cfg.collimator_focal_m);
  rig.reticle = cfg.reticle;
  rig.noise_sigma_px = cfg.test_noise_px;
  rig.seed = derive_seed(seed, "rig");
  rig.out_of_frame = cfg.out_of_frame;

  ReferenceScenario ref;
  ref.camera = cfg.reference;
  ref.rotation = euler_rotation(cfg.reference_euler_deg);
  ref.noise_sigma_px = cfg.reference_noise_px;
  ref.seed = derive_seed(seed, "reference");

  const CollimatorObservation obs = simulate_collimator_pair(rig, ref);

  SimulationOutput out;
  auto& truth = out.truth;
  truth.test = {cfg.test.intrinsics, cfg.test.distortion, rig.true_pose};
  truth.frame = cfg.test.frame;
  truth.reference = {cfg.reference.intrinsics, cfg.reference.distortion};
  truth.reference_rotation = ref.rotation;
  truth.R_r = true_reference_rotation(rig);
  truth.euler = matrix_to_euler_xyz(truth.R_r);
  const std::string hash = digest(write_truth(truth));

  out.test.role = CameraRole::kTest;
  out.test.layout = RecordLayout::kPlanar;
  out.test.seed = seed;
  out.test.scenario_hash = hash;
  out.test.frame = cfg.test.frame;
  for (const auto& p : obs.test.planar)
    out.test.records.push_back({p.id, p.pixel, {p.target.x(), p.target.y(), 0.0}});

  out.reference.role = CameraRole::kReference;
  out.reference.layout = RecordLayout::kPixel;
  out.reference.seed = seed;
  out.reference.scenario_hash = hash;
  out.reference.frame = cfg.reference.frame;
  out.reference.camera = ReferenceCamera{cfg.reference.intrinsics, cfg.reference.distortion};
  for (const auto& p : obs.reference) out.reference.records.push_back({p.id, p.pixel, Vec3::Zero()});

  const std::uint64_t field_seed = derive_seed(seed, "field");
  out.field.seed = seed;
  out.field.target_m = cfg.field_target_m;
  out.field.nominal = build_nominal_intrinsics(cfg.nominal_focal_mm, cfg.nominal_pixel_um, cfg.test.frame.width,
                                               cfg.test.frame.height)
                          .intrinsics;
  const auto frames = field_sequence(rig, cfg.field_target_m, cfg.field_frames, cfg.field_roll_jitter_deg,
                                     cfg.field_fill, field_seed);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    RigScenario frame_rig = rig;
    frame_rig.noise_sigma_px = cfg.field_noise_px;
    frame_rig.seed = derive_seed(field_seed, "frame" + std::to_string(i));
    const FieldSample s = simulate_field_test(frame_rig, frames[i]);
    out.field.samples.push_back({static_cast<int>(i), s.truth, s.observed_pixel});
  }
  return out;
}

CameraCalibration calibrate_camera(const Dataset& reference, const Dataset& test, const SimulationConfig& cfg,
                                   const RobustCost& cost, std::uint64_t seed) {
  if (reference.role != CameraRole::kReference)
    throw DatasetInvalid("calibrate-camera: first dataset must have role 'reference'");
  if (test.role != CameraRole::kTest) throw DatasetInvalid("calibrate-camera: second dataset must have role 'test'");
  if (!reference.camera) throw DatasetInvalid("calibrate-camera: reference dataset carries no 'camera' line");
  if (!test.frame) throw DatasetInvalid("calibrate-camera: test dataset carries no 'frame' line");
  cost.validate();

  const auto points = generate_virtual_points(*reference.camera, reference.observations(), cfg.depth,
                                              derive_seed(seed, "virtual_points"));
  const auto test_obs = test.observations();
  const auto corr = pair_by_id(points, test_obs);
  const RegionSplit split = split_by_region(corr, *test.frame, cfg.central_fraction);

  CameraCalibration out;
  out.central_points = split.central.size();
  out.edge_points = split.edge.size();
  out.initial = calibrate_single_image(split.central, split.edge);
  out.refined = refine_camera(out.initial, corr, cost, cfg.lm);
  return out;
}

AttitudeResult calibrate_attitude(const Dataset& test, const CameraParameters& camera, const LMSettings& settings) {
  if (test.role != CameraRole::kTest) throw DatasetInvalid("calibrate-attitude: dataset must have role 'test'");
  const auto planar = test.planar();
  return calibrate_attitude(planar, camera.intrinsics, camera.distortion, settings);
}

Evaluation evaluate(const FieldScenario& field, const CameraParameters& camera, const RotationMatrix& R_r) {
  if (field.samples.empty()) throw DatasetInvalid("evaluate: field scenario has no samples");
  Evaluation e;
  std::vector<double> ny, np, cy, cp;
  for (const auto& s : field.samples) {
    EvaluationSample row;
    row.index = s.index;
    row.truth = s.truth;
    row.nominal = target_direction(field.nominal, {}, RotationMatrix::Identity(), s.pixel);
    row.calibrated = target_direction(camera.intrinsics, camera.distortion, R_r, s.pixel);
    ny.push_back(std::abs(angle_diff(row.nominal.yaw_deg, row.truth.yaw_deg)));
    np.push_back(std::abs(row.nominal.pitch_deg - row.truth.pitch_deg));
    cy.push_back(std::abs(angle_diff(row.calibrated.yaw_deg, row.truth.yaw_deg)));
    cp.push_back(std::abs(row.calibrated.pitch_deg - row.truth.pitch_deg));
    e.samples.push_back(row);
  }
  e.nominal_yaw = stats_of(ny);
  e.nominal_pitch = stats_of(np);
  e.calibrated_yaw = stats_of(cy);
  e.calibrated_pitch = stats_of(cp);
  e.yaw_reduction = reduction(e.nominal_yaw.mean_abs_deg, e.calibrated_yaw.mean_abs_deg);
  e.pitch_reduction = reduction(e.nominal_pitch.mean_abs_deg, e.calibrated_pitch.mean_abs_deg);
  e.overall_reduction = reduction(e.nominal_yaw.mean_abs_deg + e.nominal_pitch.mean_abs_deg,
                                  e.calibrated_yaw.mean_abs_deg + e.calibrated_pitch.mean_abs_deg);
  return e;
}

// ------------------------------------------------------------------ reports

Report camera_report(const CameraCalibration& c, const RobustCost& cost, std::uint64_t seed,
                     const std::vector<InputDigest>& inputs) {
  Report r;
  r.kind = "camera-report";
  add_header(r, "calibrate-camera", seed, inputs);
  r.add("cost", std::vector<std::string>{std::string(to_string(cost.kind)), format_double(cost.huber_delta_px)});
  r.add("points", std::vector<std::string>{std::to_string(c.refined.per_point_residuals.size()),
                                           std::to_string(c.central_points), std::to_string(c.edge_points)});
  const auto& K0 = c.initial.intrinsics;
  r.add("initial_intrinsics", {K0.fx, K0.fy, K0.u0, K0.v0});
  r.add("initial_distortion", {c.initial.distortion.k1, c.initial.distortion.k2});
  const auto& K = c.refined.intrinsics;
  r.add("intrinsics", {K.fx, K.fy, K.u0, K.v0});
  r.add("distortion", {c.refined.distortion.k1, c.refined.distortion.k2});
  add_pose(r, c.refined.pose);
  const EulerAnglesXYZ e = matrix_to_euler_xyz(c.refined.pose.rotation);
  r.add("euler_deg", {e.theta_x, e.theta_y, e.theta_z});
  r.add("rms_px", {c.refined.rms_reprojection_px});
  r.add("max_px", {c.refined.max_reprojection_px});
  add_solver(r, c.refined.summary);
  for (const auto& p : c.refined.per_point_residuals)
    r.add("residual", std::vector<std::string>{std::to_string(p.id), format_double(p.residual.x()),
                                               format_double(p.residual.y())});
  return r;
}

Report attitude_report(const AttitudeResult& a, const CameraParameters& camera, std::uint64_t seed,
                       const std::vector<InputDigest>& inputs) {
  Report r;
  r.kind = "attitude-report";
  add_header(r, "calibrate-attitude", seed, inputs);
  r.add("cost", std::vector<std::string>{"squared"});
  const auto& K = camera.intrinsics;
  r.add("intrinsics", {K.fx, K.fy, K.u0, K.v0});
  r.add("distortion", {camera.distortion.k1, camera.distortion.k2});
  add_pose(r, {a.R_t, a.t_t});
  r.add("R_r", matrix_values(a.R_r));
  r.add("euler_deg", {a.euler.theta_x, a.euler.theta_y, a.euler.theta_z});
  r.add("rms_px", {a.rms_px});
  r.add("max_px", {a.max_px});
  add_solver(r, a.summary);
  return r;
}

Report evaluation_report(const Evaluation& e, std::uint64_t seed, const std::vector<InputDigest>& inputs) {
  Report r;
  r.kind = "evaluation-report";
  add_header(r, "evaluate", seed, inputs);
  r.add("columns", std::vector<std::string>{"axis", "group", "mean_abs_deg", "std_deg"});
  auto row = [&r](const char* axis, const char* group, const ErrorStats& s) {
    r.add("row", std::vector<std::string>{axis, group, format_double(s.mean_abs_deg), format_double(s.std_deg)});
  };
  row("yaw", "nominal", e.nominal_yaw);
  row("yaw", "calibrated", e.calibrated_yaw);
  row("pitch", "nominal", e.nominal_pitch);
  row("pitch", "calibrated", e.calibrated_pitch);
  r.add("reduction", std::vector<std::string>{"yaw", format_double(e.yaw_reduction), "pitch",
                                              format_double(e.pitch_reduction), "overall",
                                              format_double(e.overall_reduction)});
  r.add("sample_fields", std::vector<std::string>{"index", "truth_yaw", "truth_pitch", "nominal_yaw",
                                                  "nominal_pitch", "calibrated_yaw", "calibrated_pitch"});
  for (const auto& s : e.samples)
    r.add("sample", std::vector<std::string>{std::to_string(s.index), format_double(s.truth.yaw_deg),
                                             format_double(s.truth.pitch_deg), format_double(s.nominal.yaw_deg),
                                             format_double(s.nominal.pitch_deg),
                                             format_double(s.calibrated.yaw_deg),
                                             format_double(s.calibrated.pitch_deg)});
  return r;
}

std::string evaluation_table(const Evaluation& e) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "axis   group        mean|d|/deg  std/deg\n";
  auto row = [&out](const char* axis, const char* group, const ErrorStats& s) {
    out << std::left << std::setw(7) << axis << std::setw(13) << group << std::right << std::setw(11)
        << s.mean_abs_deg << std::setw(9) << s.std_deg << '\n';
  };
  row("yaw", "nominal", e.nominal_yaw);
  row("yaw", "calibrated", e.calibrated_yaw);
  row("pitch", "nominal", e.nominal_pitch);
  row("pitch", "calibrated", e.calibrated_pitch);
  out << std::setprecision(1) << "reduction: yaw " << 100.0 * e.yaw_reduction << "%, pitch "
      << 100.0 * e.pitch_reduction << "%, overall " << 100.0 * e.overall_reduction << "%\n";
  return out.str();
}

void stamp(Report& r, const std::string& timestamp) {
  auto it = r.lines.begin();
  if (it != r.lines.end() && it->first == "tool") ++it;
  r.lines.insert(it, {"timestamp", {timestamp}});
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

// -------------------------------------------------------------------- files

std::vector<std::filesystem::path> run_simulate(const RunOptions& opt) {
  const SimulationConfig cfg = load_config(opt);
  const SimulationOutput sim = simulate(cfg, opt.seed);
  ensure_output(opt.output);
  const std::vector<std::pair<std::string, std::string>> files = {
      {"reference.txt", write_dataset(sim.reference)},
      {"test.txt", write_dataset(sim.test)},
      {"field.txt", write_field(sim.field)},
      {"truth.txt", write_truth(sim.truth)},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [name, text] : files) {
    write_file(opt.output / name, text);
    written.push_back(opt.output / name);
  }
  return written;
}

std::filesystem::path run_calibrate_camera(const RunOptions& opt, const std::filesystem::path& reference,
                                           const std::filesystem::path& test) {
  const SimulationConfig cfg = load_config(opt);
  const std::string ref_text = read_file(reference);
  const std::string test_text = read_file(test);
  const CameraCalibration c =
      calibrate_camera(parse_dataset(ref_text), parse_dataset(test_text), cfg, opt.cost, opt.seed);
  Report r = camera_report(c, opt.cost, opt.seed, {{"reference", digest(ref_text)}, {"test", digest(test_text)}});
  stamp(r, utc_now());
  ensure_output(opt.output);
  const auto path = opt.output / "camera_report.txt";
  write_file(path, write_report(r));
  return path;
}

std::filesystem::path run_calibrate_attitude(const RunOptions& opt, const std::filesystem::path& test,
                                             const std::filesystem::path& camera_report_path) {
  const SimulationConfig cfg = load_config(opt);
  const std::string test_text = read_file(test);
  const std::string cam_text = read_file(camera_report_path);
  const Report cam = parse_report(cam_text);
  if (cam.kind != "camera-report") throw DatasetInvalid("calibrate-attitude: expected a camera report");
  const CameraParameters camera = camera_from_report(cam);
  const AttitudeResult a = calibrate_attitude(parse_dataset(test_text), camera, cfg.lm);
  Report r = attitude_report(a, camera, opt.seed, {{"test", digest(test_text)}, {"camera", digest(cam_text)}});
  stamp(r, utc_now());
  ensure_output(opt.output);
  const auto path = opt.output / "attitude_report.txt";
  write_file(path, write_report(r));
  return path;
}

std::string run_evaluate(const RunOptions& opt, const std::filesystem::path& attitude_report_path,
                         const std::filesystem::path& camera_report_path, const std::filesystem::path& field) {
  const std::string att_text = read_file(attitude_report_path);
  const std::string cam_text = read_file(camera_report_path);
  const std::string field_text = read_file(field);
  const Report att = parse_report(att_text);
  if (att.kind != "attitude-report") throw DatasetInvalid("evaluate: expected an attitude report");
  const Report cam = parse_report(cam_text);
  if (cam.kind != "camera-report") throw DatasetInvalid("evaluate: expected a camera report");
  const Evaluation e = evaluate(parse_field(field_text), camera_from_report(cam), attitude_from_report(att));
  Report r = evaluation_report(
      e, opt.seed,
      {{"attitude", digest(att_text)}, {"camera", digest(cam_text)}, {"field", digest(field_text)}});
  stamp(r, utc_now());
  ensure_output(opt.output);
  write_file(opt.output / "evaluation.txt", write_report(r));
  return evaluation_table(e);
}

}  // namespace collcal
