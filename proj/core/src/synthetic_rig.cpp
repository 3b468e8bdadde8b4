#include "collcal/synthetic_rig.hpp"

#include "collcal/errors.hpp"
#include "collcal/rng.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <unordered_map>

namespace collcal {

void ReticleSpec::validate() const {
  if (rows < 2 || cols < 2) throw ConfigInvalid("reticle: rows and cols must be >= 2");
  if (!(pitch_m > 0.0) || !std::isfinite(pitch_m)) throw ConfigInvalid("reticle.pitch_m must be > 0");
}

Vec2 ReticleSpec::position(FeatureId id) const {
  const auto r = static_cast<double>(id / cols);
  const auto c = static_cast<double>(id % cols);
  return {(c - 0.5 * (cols - 1)) * pitch_m, (r - 0.5 * (rows - 1)) * pitch_m};
}

void RigScenario::validate() const {
  true_camera.intrinsics.validate();
  reticle.validate();
  if (!(noise_sigma_px >= 0.0)) throw ConfigInvalid("noise_sigma_px must be >= 0");
  if (true_camera.frame.width <= 0 || true_camera.frame.height <= 0)
    throw ConfigInvalid("frame size must be positive");
  if (!is_rotation(true_pose.rotation, 1e-9)) throw ConfigInvalid("true pose rotation is not a rotation");
}

PoseRT collimator_pose(const RotationMatrix& rotation, double focal_m) {
  return {rotation, focal_m * rotation.col(2)};
}

RotationMatrix true_reference_rotation(const RigScenario& rig) {
  return rig.true_pose.rotation * rig.reference_to_target;
}

namespace {

struct Projected {
  FeatureId id;
  PixelPoint pixel;
  bool inside;
};

std::vector<Projected> project_reticle(const ReticleSpec& reticle, const PoseRT& pose,
                                       const SimCamera& cam, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Projected> out;
  out.reserve(static_cast<std::size_t>(reticle.size()));
  for (FeatureId id = 0; id < reticle.size(); ++id) {
    const Vec2 xy = reticle.position(id);
    const Vec3 Pc = pose.apply(Point3(xy.x(), xy.y(), 0.0));
    if (!(Pc.z() > 0.0))
      throw BehindCamera("simulate: reticle feature " + std::to_string(id) + " is behind the camera");
    const PixelPoint exact = project_camera_point(Pc, cam.intrinsics, cam.distortion);
    // Two draws per feature regardless of visibility keep the noise stream
    // aligned with feature ids.
    const double nu = rng.normal();
    const double nv = rng.normal();
    out.push_back({id, {exact.u + sigma * nu, exact.v + sigma * nv}, cam.frame.contains(exact)});
  }
  return out;
}

void check_frame(const std::vector<Projected>& pts, OutOfFramePolicy policy, const char* who) {
  if (policy == OutOfFramePolicy::kDrop) return;
  std::ostringstream ids;
  int count = 0;
  for (const auto& p : pts) {
    if (p.inside) continue;
    if (count++ < 20) ids << ' ' << p.id;
  }
  if (count == 0) return;
  std::ostringstream msg;
  msg << who << ": " << count << " reticle features fall outside the frame:" << ids.str()
      << (count > 20 ? " ..." : "");
  throw PointOutsideFrame(msg.str());
}

}  // namespace

ReticleObservation simulate_reticle_observation(const RigScenario& rig) {
  rig.validate();
  const auto pts = project_reticle(rig.reticle, rig.true_pose, rig.true_camera, rig.noise_sigma_px,
                                   derive_seed(rig.seed, "test_noise"));
  check_frame(pts, rig.out_of_frame, "test camera");
  ReticleObservation obs;
  for (const auto& p : pts) {
    if (p.inside)
      obs.planar.push_back({p.id, p.pixel, rig.reticle.position(p.id)});
    else
      obs.out_of_frame.push_back(p.id);
  }
  return obs;
}

CollimatorObservation simulate_collimator_pair(const RigScenario& rig, const ReferenceScenario& ref) {
  ref.camera.intrinsics.validate();
  if (!(ref.noise_sigma_px >= 0.0)) throw ConfigInvalid("reference noise_sigma_px must be >= 0");

  CollimatorObservation out;
  out.test = simulate_reticle_observation(rig);

  // Both cameras share one optical centre relative to the reticle.
  const Vec3 centre = -rig.true_pose.rotation.transpose() * rig.true_pose.translation;
  const PoseRT ref_pose{ref.rotation, -ref.rotation * centre};
  const auto ref_pts = project_reticle(rig.reticle, ref_pose, ref.camera, ref.noise_sigma_px,
                                       derive_seed(ref.seed, "reference_noise"));
  check_frame(ref_pts, rig.out_of_frame, "reference camera");

  std::unordered_map<FeatureId, bool> ref_visible;
  for (const auto& p : ref_pts) ref_visible[p.id] = p.inside;

  std::vector<PlanarCorrespondence> both;
  for (const auto& p : out.test.planar) {
    if (ref_visible[p.id])
      both.push_back(p);
    else
      out.test.out_of_frame.push_back(p.id);
  }
  out.test.planar = std::move(both);
  std::sort(out.test.out_of_frame.begin(), out.test.out_of_frame.end());

  for (const auto& p : out.test.planar)
    out.reference.push_back({p.id, ref_pts[static_cast<std::size_t>(p.id)].pixel});

  out.test_from_reference.rotation = rig.true_pose.rotation * ref_pose.rotation.transpose();
  out.test_from_reference.translation =
      rig.true_pose.translation - out.test_from_reference.rotation * ref_pose.translation;
  return out;
}

std::vector<Correspondence> virtual_control_correspondences(const CollimatorObservation& obs,
                                                            const ReferenceCamera& ref_cam,
                                                            const DepthRange& range,
                                                            std::uint64_t seed) {
  const auto points = generate_virtual_points(ref_cam, obs.reference, range, seed);
  std::vector<FeatureObservation> test;
  test.reserve(obs.test.planar.size());
  for (const auto& p : obs.test.planar) test.push_back({p.id, p.pixel});
  return pair_by_id(points, test);
}

FieldSample simulate_field_test(const RigScenario& rig, const TargetScenario& tgt) {
  const Vec3 in_reference = tgt.device_attitude * tgt.target_position_m;
  const Vec3 in_camera = tgt.true_R_r * in_reference;
  if (!(in_camera.z() > 0.0)) throw BehindCamera("simulate_field_test: target is behind the camera");
  const auto& cam = rig.true_camera;
  const PixelPoint exact = project_camera_point(in_camera, cam.intrinsics, cam.distortion);
  if (!cam.frame.contains(exact)) throw PointOutsideFrame("simulate_field_test: target outside the frame");
  Rng rng(derive_seed(rig.seed, "field_noise"));
  const double nu = rng.normal();
  const double nv = rng.normal();
  return {direction_of(in_reference),
          {exact.u + rig.noise_sigma_px * nu, exact.v + rig.noise_sigma_px * nv}};
}

std::vector<TargetScenario> field_sequence(const RigScenario& rig, const Point3& target_position_m,
                                           int frames, double roll_jitter_deg, double fill,
                                           std::uint64_t seed) {
  if (frames <= 0) throw ConfigInvalid("field.frames must be positive");
  if (!(fill > 0.0 && fill <= 1.0)) throw ConfigInvalid("field fill must be in (0, 1]");
  if (!(target_position_m.norm() > 0.0)) throw ConfigInvalid("field.target_m must be nonzero");

  Rng rng(derive_seed(seed, "field_sequence"));
  const RotationMatrix R_r = true_reference_rotation(rig);
  const auto& frame = rig.true_camera.frame;
  const auto& K = rig.true_camera.intrinsics;
  const Vec3 line_of_sight = target_position_m.normalized();

  std::vector<TargetScenario> out;
  out.reserve(static_cast<std::size_t>(frames));
  for (int i = 0; i < frames; ++i) {
    const PixelPoint aim{0.5 * frame.width * (1.0 + fill * rng.uniform(-1.0, 1.0)),
                         0.5 * frame.height * (1.0 + fill * rng.uniform(-1.0, 1.0))};
    const Vec3 cam_ray = pixel_to_ray(aim, K).ray().normalized();
    const Vec3 ref_ray = R_r.transpose() * cam_ray;
    const double roll = deg_to_rad(roll_jitter_deg * rng.uniform(-1.0, 1.0));
    const Eigen::Quaterniond align = Eigen::Quaterniond::FromTwoVectors(line_of_sight, ref_ray);
    const Mat3 attitude = Eigen::AngleAxisd(roll, ref_ray).toRotationMatrix() * align.toRotationMatrix();
    out.push_back({target_position_m, R_r, attitude});
  }
  return out;
}

NominalCamera build_nominal_intrinsics(double equiv_focal_mm, double pixel_size_um, int width_px,
                                       int height_px) {
  if (!(equiv_focal_mm > 0.0) || !(pixel_size_um > 0.0) || width_px <= 0 || height_px <= 0)
    throw ConfigInvalid("nominal camera: all inputs must be positive");
  const double f = 1000.0 * equiv_focal_mm / pixel_size_um;
  return {{f, f, 0.5 * width_px, 0.5 * height_px}, {}};
}

namespace {

double normalized_half_field(const SimCamera& cam) {
  const auto& K = cam.intrinsics;
  const double hu = std::min(K.u0, cam.frame.width - K.u0) / K.fx;
  const double hv = std::min(K.v0, cam.frame.height - K.v0) / K.fy;
  return std::min(hu, hv);
}

}  // namespace

double fit_reticle_pitch(const ReticleSpec& reticle, double collimator_focal_m, const SimCamera& a,
                         const SimCamera& b, double fill, double margin) {
  const double half =
      fill * std::min(normalized_half_field(a), normalized_half_field(b)) - margin;
  if (!(half > 0.0)) throw ConfigInvalid("fit_reticle_pitch: cameras leave no room for the reticle");
  return 2.0 * half * collimator_focal_m / static_cast<double>(std::max(reticle.rows, reticle.cols) - 1);
}

SampledScenario sample_scenario(const ScenarioBounds& bounds, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "scenario"));
  SampledScenario s;

  auto& test = s.rig.true_camera;
  test.intrinsics.fx = rng.uniform(bounds.focal_min_px, bounds.focal_max_px);
  test.intrinsics.fy = test.intrinsics.fx * (1.0 + rng.uniform(-bounds.aspect_jitter, bounds.aspect_jitter));
  // Sensor sized to the focal length: normalised half-field of 0.24 x 0.19.
  test.frame = {2 * static_cast<int>(std::lround(0.24 * test.intrinsics.fx)),
                2 * static_cast<int>(std::lround(0.19 * test.intrinsics.fx))};
  test.intrinsics.u0 = 0.5 * test.frame.width + rng.uniform(-1.0, 1.0) * bounds.principal_jitter_px;
  test.intrinsics.v0 = 0.5 * test.frame.height + rng.uniform(-1.0, 1.0) * bounds.principal_jitter_px;
  test.distortion = {rng.uniform(-bounds.k1_abs_max, bounds.k1_abs_max),
                     rng.uniform(-bounds.k2_abs_max, bounds.k2_abs_max)};

  const double a = bounds.attitude_abs_max_deg;
  const RotationMatrix R_t =
      euler_xyz_to_matrix({rng.uniform(-a, a), rng.uniform(-a, a), rng.uniform(-a, a)});
  s.rig.true_pose = collimator_pose(R_t, bounds.collimator_focal_m);
  s.rig.noise_sigma_px = bounds.noise_sigma_px;
  s.rig.seed = derive_seed(seed, "rig");

  s.reference.camera = {{5967.7, 5969.0, 1222.4, 1023.5}, {0.2380, 2.0007}, {2448, 2048}};
  s.reference.rotation =
      euler_xyz_to_matrix({rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)});
  s.reference.seed = derive_seed(seed, "reference");
  s.reference.noise_sigma_px = 0.0;

  s.rig.reticle.rows = 15;
  s.rig.reticle.cols = 15;
  const double margin = std::sqrt(3.0) * deg_to_rad(a + 0.5);
  s.rig.reticle.pitch_m =
      fit_reticle_pitch(s.rig.reticle, bounds.collimator_focal_m, test, s.reference.camera, 0.85, margin);
  return s;
}

}  // namespace collcal
