#include "collcal/formats.hpp"

#include "collcal/errors.hpp"
#include "collcal/rng.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <system_error>

namespace collcal {

std::string format_double(double v) {
  if (v == 0.0) return std::signbit(v) ? "-0" : "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

double parse_double(std::string_view s, std::string_view context) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v))
    throw DatasetInvalid(std::string(context) + ": '" + std::string(s) + "' is not a finite number");
  return v;
}

std::int64_t parse_int(std::string_view s, std::string_view context) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw DatasetInvalid(std::string(context) + ": '" + std::string(s) + "' is not an integer");
  return v;
}

std::uint64_t parse_u64(std::string_view s, std::string_view context) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw DatasetInvalid(std::string(context) + ": '" + std::string(s) + "' is not an unsigned integer");
  return v;
}

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
  return out;
}

std::string digest(std::string_view bytes) { return hex64(fnv1a64(bytes)); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("cannot write " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

namespace {

struct Line {
  int number{0};
  std::vector<std::string> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> out;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    ++number;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    Line line{number, {}};
    std::istringstream ss{std::string(raw)};
    std::string tok;
    while (ss >> tok) line.tokens.push_back(tok);
    if (!line.tokens.empty()) out.push_back(std::move(line));
  }
  return out;
}

std::string where(const Line& l) { return "line " + std::to_string(l.number); }

void expect_header(const std::vector<Line>& lines, std::string_view kind) {
  const std::string magic = "collcal-" + std::string(kind);
  if (lines.empty() || lines.front().tokens.size() != 2 || lines.front().tokens[0] != magic)
    throw DatasetInvalid("missing '" + magic + " <version>' header");
  const auto version = parse_int(lines.front().tokens[1], "line 1: version");
  if (version != kFormatVersion)
    throw DatasetInvalid("unsupported " + magic + " version " + std::to_string(version));
  if (lines.size() < 2 || lines.back().tokens != std::vector<std::string>{"end"})
    throw DatasetInvalid(magic + ": missing 'end' line (truncated file?)");
}

void expect_count(const Line& l, std::size_t n) {
  if (l.tokens.size() != n)
    throw DatasetInvalid(where(l) + ": '" + l.tokens[0] + "' expects " + std::to_string(n - 1) +
                         " values, got " + std::to_string(l.tokens.size() - 1));
}

double number_at(const Line& l, std::size_t i) {
  return parse_double(l.tokens[i], where(l) + " " + l.tokens[0]);
}

std::vector<std::string> fields_for(RecordLayout layout) {
  switch (layout) {
    case RecordLayout::kPixel: return {"id", "u", "v"};
    case RecordLayout::kPlanar: return {"id", "u", "v", "Xt", "Yt"};
    case RecordLayout::kSpatial: return {"id", "u", "v", "X", "Y", "Z"};
  }
  return {};
}

}  // namespace

// ---------------------------------------------------------------- datasets

std::vector<FeatureObservation> Dataset::observations() const {
  std::vector<FeatureObservation> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.id, r.pixel});
  return out;
}

std::vector<PlanarCorrespondence> Dataset::planar() const {
  if (layout != RecordLayout::kPlanar) throw DatasetInvalid("dataset has no planar target coordinates");
  std::vector<PlanarCorrespondence> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.id, r.pixel, r.coords.head<2>()});
  return out;
}

std::string write_dataset(const Dataset& ds) {
  std::ostringstream out;
  out << "collcal-dataset " << kFormatVersion << '\n';
  out << "role " << (ds.role == CameraRole::kReference ? "reference" : "test") << '\n';
  out << "units pixel meter\n";
  out << "meta seed " << ds.seed << '\n';
  if (!ds.scenario_hash.empty()) out << "meta scenario " << ds.scenario_hash << '\n';
  if (ds.frame) out << "frame " << ds.frame->width << ' ' << ds.frame->height << '\n';
  if (ds.camera) {
    const auto& K = ds.camera->intrinsics;
    const auto& d = ds.camera->distortion;
    out << "camera " << format_double(K.fx) << ' ' << format_double(K.fy) << ' ' << format_double(K.u0)
        << ' ' << format_double(K.v0) << ' ' << format_double(d.k1) << ' ' << format_double(d.k2) << '\n';
  }
  out << "fields";
  for (const auto& f : fields_for(ds.layout)) out << ' ' << f;
  out << '\n';
  for (const auto& r : ds.records) {
    out << "point " << r.id << ' ' << format_double(r.pixel.u) << ' ' << format_double(r.pixel.v);
    if (ds.layout == RecordLayout::kPlanar)
      out << ' ' << format_double(r.coords.x()) << ' ' << format_double(r.coords.y());
    else if (ds.layout == RecordLayout::kSpatial)
      out << ' ' << format_double(r.coords.x()) << ' ' << format_double(r.coords.y()) << ' '
          << format_double(r.coords.z());
    out << '\n';
  }
  out << "end\n";
  return out.str();
}

Dataset parse_dataset(std::string_view text) {
  const auto lines = tokenize(text);
  expect_header(lines, "dataset");

  Dataset ds;
  bool have_role = false;
  bool have_units = false;
  std::optional<RecordLayout> layout;
  std::set<FeatureId> seen;
  for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
    const Line& l = lines[i];
    const std::string& key = l.tokens[0];
    if (key == "role") {
      expect_count(l, 2);
      if (l.tokens[1] == "reference")
        ds.role = CameraRole::kReference;
      else if (l.tokens[1] == "test")
        ds.role = CameraRole::kTest;
      else
        throw DatasetInvalid(where(l) + ": role must be 'reference' or 'test'");
      have_role = true;
    } else if (key == "units") {
      expect_count(l, 3);
      if (l.tokens[1] != "pixel" || l.tokens[2] != "meter")
        throw DatasetInvalid(where(l) + ": units must be 'pixel meter'");
      have_units = true;
    } else if (key == "meta") {
      expect_count(l, 3);
      if (l.tokens[1] == "seed")
        ds.seed = parse_u64(l.tokens[2], where(l) + " meta seed");
      else if (l.tokens[1] == "scenario")
        ds.scenario_hash = l.tokens[2];
      else
        throw DatasetInvalid(where(l) + ": unknown meta key '" + l.tokens[1] + "'");
    } else if (key == "frame") {
      expect_count(l, 3);
      const FrameSize f{static_cast<int>(parse_int(l.tokens[1], where(l) + " frame")),
                        static_cast<int>(parse_int(l.tokens[2], where(l) + " frame"))};
      if (f.width <= 0 || f.height <= 0) throw DatasetInvalid(where(l) + ": frame must be positive");
      ds.frame = f;
    } else if (key == "camera") {
      expect_count(l, 7);
      ReferenceCamera cam{{number_at(l, 1), number_at(l, 2), number_at(l, 3), number_at(l, 4)},
                          {number_at(l, 5), number_at(l, 6)}};
      cam.intrinsics.validate();
      ds.camera = cam;
    } else if (key == "fields") {
      const std::vector<std::string> names(l.tokens.begin() + 1, l.tokens.end());
      for (auto candidate : {RecordLayout::kPixel, RecordLayout::kPlanar, RecordLayout::kSpatial})
        if (names == fields_for(candidate)) layout = candidate;
      if (!layout) throw DatasetInvalid(where(l) + ": unrecognised field list");
      ds.layout = *layout;
    } else if (key == "point") {
      if (!layout) throw DatasetInvalid(where(l) + ": 'point' before 'fields'");
      expect_count(l, fields_for(*layout).size() + 1);
      DatasetRecord r;
      r.id = parse_int(l.tokens[1], where(l) + " id");
      if (!seen.insert(r.id).second)
        throw DuplicateId(where(l) + ": duplicate feature id " + std::to_string(r.id));
      r.pixel = {number_at(l, 2), number_at(l, 3)};
      if (*layout == RecordLayout::kPlanar) r.coords = {number_at(l, 4), number_at(l, 5), 0.0};
      if (*layout == RecordLayout::kSpatial) r.coords = {number_at(l, 4), number_at(l, 5), number_at(l, 6)};
      ds.records.push_back(r);
    } else {
      throw DatasetInvalid(where(l) + ": unknown key '" + key + "'");
    }
  }
  if (!have_role) throw DatasetInvalid("dataset: missing 'role'");
  if (!have_units) throw DatasetInvalid("dataset: missing 'units'");
  if (!layout) throw DatasetInvalid("dataset: missing 'fields'");
  return ds;
}

// ------------------------------------------------------------------ reports

void Report::add(std::string key, std::vector<std::string> values) {
  lines.emplace_back(std::move(key), std::move(values));
}

void Report::add(std::string key, std::initializer_list<double> values) {
  std::vector<std::string> s;
  s.reserve(values.size());
  for (double v : values) s.push_back(format_double(v));
  add(std::move(key), std::move(s));
}

const std::vector<std::string>* Report::find(std::string_view key) const {
  for (const auto& [k, v] : lines)
    if (k == key) return &v;
  return nullptr;
}

std::vector<double> Report::numbers(std::string_view key, std::size_t n) const {
  const auto* v = find(key);
  if (!v) throw DatasetInvalid(kind + ": missing '" + std::string(key) + "'");
  if (v->size() < n)
    throw DatasetInvalid(kind + ": '" + std::string(key) + "' needs " + std::to_string(n) + " values");
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(parse_double((*v)[i], kind + " " + std::string(key)));
  return out;
}

std::string write_report(const Report& r) {
  std::ostringstream out;
  out << "collcal-" << r.kind << ' ' << kFormatVersion << '\n';
  for (const auto& [key, values] : r.lines) {
    out << key;
    for (const auto& v : values) out << ' ' << v;
    out << '\n';
  }
  out << "end\n";
  return out.str();
}

Report parse_report(std::string_view text) {
  const auto lines = tokenize(text);
  if (lines.empty() || lines.front().tokens[0].rfind("collcal-", 0) != 0)
    throw DatasetInvalid("not a collcal file");
  Report r;
  r.kind = lines.front().tokens[0].substr(8);
  expect_header(lines, r.kind);
  for (std::size_t i = 1; i + 1 < lines.size(); ++i)
    r.add(lines[i].tokens[0], std::vector<std::string>(lines[i].tokens.begin() + 1, lines[i].tokens.end()));
  return r;
}

std::string strip_timestamp(std::string_view text) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size() - 1;
    const std::string_view line = text.substr(pos, nl - pos + 1);
    if (line.rfind("timestamp ", 0) != 0) out += line;
    pos = nl + 1;
  }
  return out;
}

namespace {

Mat3 matrix_from(const std::vector<double>& v) {
  Mat3 m;
  m << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  return m;
}

std::vector<std::string> matrix_values(const Mat3& m) {
  std::vector<std::string> out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.push_back(format_double(m(r, c)));
  return out;
}

RotationMatrix rotation_from(const Report& r, std::string_view key) {
  const Mat3 m = matrix_from(r.numbers(key, 9));
  if (!is_rotation(m, 1e-9)) throw DatasetInvalid(r.kind + ": '" + std::string(key) + "' is not a rotation");
  return m;
}

}  // namespace

CameraParameters camera_from_report(const Report& r) {
  const auto K = r.numbers("intrinsics", 4);
  const auto d = r.numbers("distortion", 2);
  const auto t = r.numbers("translation", 3);
  CameraParameters p{{K[0], K[1], K[2], K[3]}, {d[0], d[1]}, {rotation_from(r, "rotation"), {t[0], t[1], t[2]}}};
  p.intrinsics.validate();
  return p;
}

RotationMatrix attitude_from_report(const Report& r) { return rotation_from(r, "R_r"); }

// ------------------------------------------------------------ truth sidecar

std::string write_truth(const Truth& t) {
  Report r;
  r.kind = "truth";
  const auto& K = t.test.intrinsics;
  r.add("intrinsics", {K.fx, K.fy, K.u0, K.v0});
  r.add("distortion", {t.test.distortion.k1, t.test.distortion.k2});
  r.add("rotation", matrix_values(t.test.pose.rotation));
  const Vec3& tr = t.test.pose.translation;
  r.add("translation", {tr.x(), tr.y(), tr.z()});
  r.add("frame", {std::to_string(t.frame.width), std::to_string(t.frame.height)});
  const auto& RK = t.reference.intrinsics;
  r.add("reference_intrinsics", {RK.fx, RK.fy, RK.u0, RK.v0});
  r.add("reference_distortion", {t.reference.distortion.k1, t.reference.distortion.k2});
  r.add("reference_rotation", matrix_values(t.reference_rotation));
  r.add("R_r", matrix_values(t.R_r));
  r.add("euler_deg", {t.euler.theta_x, t.euler.theta_y, t.euler.theta_z});
  return write_report(r);
}

Truth parse_truth(std::string_view text) {
  const Report r = parse_report(text);
  if (r.kind != "truth") throw DatasetInvalid("expected a truth file, got '" + r.kind + "'");
  Truth t;
  t.test = camera_from_report(r);
  const auto f = r.numbers("frame", 2);
  t.frame = {static_cast<int>(f[0]), static_cast<int>(f[1])};
  const auto RK = r.numbers("reference_intrinsics", 4);
  const auto Rd = r.numbers("reference_distortion", 2);
  t.reference = {{RK[0], RK[1], RK[2], RK[3]}, {Rd[0], Rd[1]}};
  t.reference_rotation = rotation_from(r, "reference_rotation");
  t.R_r = rotation_from(r, "R_r");
  const auto e = r.numbers("euler_deg", 3);
  t.euler = {e[0], e[1], e[2]};
  return t;
}

// ----------------------------------------------------------- field scenario

std::string write_field(const FieldScenario& f) {
  Report r;
  r.kind = "field";
  r.add("seed", std::vector<std::string>{std::to_string(f.seed)});
  r.add("target_m", {f.target_m.x(), f.target_m.y(), f.target_m.z()});
  r.add("nominal_intrinsics", {f.nominal.fx, f.nominal.fy, f.nominal.u0, f.nominal.v0});
  r.add("fields", std::vector<std::string>{"index", "yaw_deg", "pitch_deg", "u", "v"});
  for (const auto& s : f.samples) {
    r.add("sample", {static_cast<double>(s.index), s.truth.yaw_deg, s.truth.pitch_deg, s.pixel.u, s.pixel.v});
  }
  return write_report(r);
}

FieldScenario parse_field(std::string_view text) {
  const Report r = parse_report(text);
  if (r.kind != "field") throw DatasetInvalid("expected a field scenario, got '" + r.kind + "'");
  FieldScenario f;
  const auto* seed = r.find("seed");
  if (!seed || seed->size() != 1) throw DatasetInvalid("field: missing 'seed'");
  f.seed = parse_u64((*seed)[0], "field seed");
  const auto t = r.numbers("target_m", 3);
  f.target_m = {t[0], t[1], t[2]};
  const auto K = r.numbers("nominal_intrinsics", 4);
  f.nominal = {K[0], K[1], K[2], K[3]};
  f.nominal.validate();
  for (const auto& [key, values] : r.lines) {
    if (key != "sample") continue;
    if (values.size() != 5) throw DatasetInvalid("field: 'sample' expects 5 values");
    FieldRecord s;
    s.index = static_cast<int>(parse_int(values[0], "field sample index"));
    s.truth = {parse_double(values[1], "field sample"), parse_double(values[2], "field sample")};
    s.pixel = {parse_double(values[3], "field sample"), parse_double(values[4], "field sample")};
    f.samples.push_back(s);
  }
  if (f.samples.empty()) throw DatasetInvalid("field: no samples");
  return f;
}

// ------------------------------------------------------------ configuration

Config parse_config(std::string_view text) {
  Config cfg;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string line(text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos));
    ++number;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigInvalid("config line " + std::to_string(number) + ": expected 'key = value'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string{};
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigInvalid("config line " + std::to_string(number) + ": empty key or value");
    if (cfg.values.count(key))
      throw ConfigInvalid("config line " + std::to_string(number) + ": " + key + " given twice");
    cfg.values[key] = value;
    cfg.line_of[key] = number;
  }
  return cfg;
}

void SimulationConfig::validate() const {
  auto positive = [](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigInvalid(std::string(field) + " must be > 0");
  };
  auto nonnegative = [](double v, const char* field) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigInvalid(std::string(field) + " must be >= 0");
  };
  positive(test.intrinsics.fx, "test.fx");
  positive(test.intrinsics.fy, "test.fy");
  positive(reference.intrinsics.fx, "reference.fx");
  positive(reference.intrinsics.fy, "reference.fy");
  if (test.frame.width <= 0 || test.frame.height <= 0) throw ConfigInvalid("test.width/test.height must be > 0");
  if (reference.frame.width <= 0 || reference.frame.height <= 0)
    throw ConfigInvalid("reference.width/reference.height must be > 0");
  nonnegative(test_noise_px, "test.noise_px");
  nonnegative(reference_noise_px, "reference.noise_px");
  if (reticle.rows < 2) throw ConfigInvalid("reticle.rows must be >= 2");
  if (reticle.cols < 2) throw ConfigInvalid("reticle.cols must be >= 2");
  positive(reticle.pitch_m, "reticle.pitch_m");
  positive(collimator_focal_m, "collimator.focal_m");
  if (field_frames <= 0) throw ConfigInvalid("field.frames must be > 0");
  nonnegative(field_roll_jitter_deg, "field.roll_jitter_deg");
  if (!(field_fill > 0.0 && field_fill <= 1.0)) throw ConfigInvalid("field.fill must be in (0, 1]");
  nonnegative(field_noise_px, "field.noise_px");
  if (!(field_target_m.norm() > 0.0)) throw ConfigInvalid("field.target_m must be nonzero");
  positive(nominal_focal_mm, "nominal.focal_mm");
  positive(nominal_pixel_um, "nominal.pixel_um");
  positive(depth.min_m, "depth.min_m");
  if (!(depth.max_m > depth.min_m)) throw ConfigInvalid("depth.max_m must exceed depth.min_m");
  if (!(central_fraction > 0.0 && central_fraction < 1.0))
    throw ConfigInvalid("region.central_fraction must be in (0, 1)");
  if (lm.max_iterations <= 0) throw ConfigInvalid("lm.max_iterations must be > 0");
  positive(lm.gradient_tolerance, "lm.gradient_tolerance");
  positive(lm.parameter_tolerance, "lm.parameter_tolerance");
  positive(lm.cost_tolerance, "lm.cost_tolerance");
  positive(lm.initial_damping, "lm.initial_damping");
}

SimulationConfig simulation_config(const Config& cfg) {
  SimulationConfig s;
  using Setter = std::function<void(const std::string&, const std::string&)>;

  auto ctx = [&cfg](const std::string& key) {
    return "config line " + std::to_string(cfg.line_of.at(key)) + ": " + key;
  };
  auto num = [&](const std::string& key, const std::string& v) {
    try {
      return parse_double(v, key);
    } catch (const DatasetInvalid&) {
      throw ConfigInvalid(ctx(key) + ": '" + v + "' is not a number");
    }
  };
  auto integer = [&](const std::string& key, const std::string& v) {
    try {
      return static_cast<int>(parse_int(v, key));
    } catch (const DatasetInvalid&) {
      throw ConfigInvalid(ctx(key) + ": '" + v + "' is not an integer");
    }
  };
  auto triple = [&](const std::string& key, const std::string& v) {
    std::istringstream ss(v);
    std::string a, b, c, extra;
    if (!(ss >> a >> b >> c) || (ss >> extra)) throw ConfigInvalid(ctx(key) + ": expected three numbers");
    return Vec3(num(key, a), num(key, b), num(key, c));
  };
  auto dbl = [&](double& field) { return Setter([&, f = &field](auto& k, auto& v) { *f = num(k, v); }); };
  auto int_ = [&](int& field) { return Setter([&, f = &field](auto& k, auto& v) { *f = integer(k, v); }); };
  auto euler = [&](EulerAnglesXYZ& e) {
    return Setter([&, p = &e](auto& k, auto& v) {
      const Vec3 a = triple(k, v);
      *p = {a.x(), a.y(), a.z()};
    });
  };

  std::map<std::string, Setter> setters = {
      {"test.fx", dbl(s.test.intrinsics.fx)},
      {"test.fy", dbl(s.test.intrinsics.fy)},
      {"test.u0", dbl(s.test.intrinsics.u0)},
      {"test.v0", dbl(s.test.intrinsics.v0)},
      {"test.k1", dbl(s.test.distortion.k1)},
      {"test.k2", dbl(s.test.distortion.k2)},
      {"test.width", int_(s.test.frame.width)},
      {"test.height", int_(s.test.frame.height)},
      {"test.euler_deg", euler(s.test_euler_deg)},
      {"test.noise_px", dbl(s.test_noise_px)},
      {"reference.fx", dbl(s.reference.intrinsics.fx)},
      {"reference.fy", dbl(s.reference.intrinsics.fy)},
      {"reference.u0", dbl(s.reference.intrinsics.u0)},
      {"reference.v0", dbl(s.reference.intrinsics.v0)},
      {"reference.k1", dbl(s.reference.distortion.k1)},
      {"reference.k2", dbl(s.reference.distortion.k2)},
      {"reference.width", int_(s.reference.frame.width)},
      {"reference.height", int_(s.reference.frame.height)},
      {"reference.euler_deg", euler(s.reference_euler_deg)},
      {"reference.noise_px", dbl(s.reference_noise_px)},
      {"reticle.rows", int_(s.reticle.rows)},
      {"reticle.cols", int_(s.reticle.cols)},
      {"reticle.pitch_m", dbl(s.reticle.pitch_m)},
      {"collimator.focal_m", dbl(s.collimator_focal_m)},
      {"out_of_frame",
       [&](auto& k, auto& v) {
         if (v == "error")
           s.out_of_frame = OutOfFramePolicy::kError;
         else if (v == "drop")
           s.out_of_frame = OutOfFramePolicy::kDrop;
         else
           throw ConfigInvalid(ctx(k) + ": expected 'error' or 'drop'");
       }},
      {"field.target_m", [&](auto& k, auto& v) { s.field_target_m = triple(k, v); }},
      {"field.frames", int_(s.field_frames)},
      {"field.roll_jitter_deg", dbl(s.field_roll_jitter_deg)},
      {"field.fill", dbl(s.field_fill)},
      {"field.noise_px", dbl(s.field_noise_px)},
      {"nominal.focal_mm", dbl(s.nominal_focal_mm)},
      {"nominal.pixel_um", dbl(s.nominal_pixel_um)},
      {"depth.min_m", dbl(s.depth.min_m)},
      {"depth.max_m", dbl(s.depth.max_m)},
      {"region.central_fraction", dbl(s.central_fraction)},
      {"lm.max_iterations", int_(s.lm.max_iterations)},
      {"lm.gradient_tolerance", dbl(s.lm.gradient_tolerance)},
      {"lm.parameter_tolerance", dbl(s.lm.parameter_tolerance)},
      {"lm.cost_tolerance", dbl(s.lm.cost_tolerance)},
      {"lm.initial_damping", dbl(s.lm.initial_damping)},
  };

  for (const auto& [key, value] : cfg.values) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigInvalid(ctx(key) + ": unknown key");
    it->second(key, value);
  }
  try {
    s.validate();
  } catch (const ConfigInvalid& e) {
    const std::string what = e.what();
    const std::string field = what.substr(0, what.find(' '));
    if (cfg.line_of.count(field)) throw ConfigInvalid("config line " + std::to_string(cfg.line_of.at(field)) + ": " + what);
    throw;
  }
  return s;
}

}  // namespace collcal
