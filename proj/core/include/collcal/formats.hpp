#pragma once

// Line-oriented text formats: datasets, truth sidecars, field scenarios,
// reports and the `key = value` configuration. Every double is written with
// the shortest decimal that reads back to the same bits.

#include "collcal/attitude.hpp"
#include "collcal/bundle_adjust.hpp"
#include "collcal/dlt.hpp"
#include "collcal/synthetic_rig.hpp"
#include "collcal/virtual_points.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace collcal {

inline constexpr int kFormatVersion = 1;

[[nodiscard]] std::string format_double(double v);
/// Throws DatasetInvalid carrying `context` when `s` is not a finite number.
[[nodiscard]] double parse_double(std::string_view s, std::string_view context);
[[nodiscard]] std::int64_t parse_int(std::string_view s, std::string_view context);
[[nodiscard]] std::uint64_t parse_u64(std::string_view s, std::string_view context);

[[nodiscard]] std::string hex64(std::uint64_t v);
/// FNV-1a over the bytes, as 16 hex digits.
[[nodiscard]] std::string digest(std::string_view bytes);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames. Throws IoError.
void write_file(const std::filesystem::path& path, std::string_view contents);

// ---------------------------------------------------------------- datasets

enum class CameraRole { kReference, kTest };
enum class RecordLayout { kPixel, kPlanar, kSpatial };

struct DatasetRecord {
  FeatureId id{0};
  PixelPoint pixel;
  Vec3 coords{Vec3::Zero()};  // (Xt, Yt, 0) planar, (X, Y, Z) spatial
};

struct Dataset {
  CameraRole role{CameraRole::kTest};
  RecordLayout layout{RecordLayout::kPixel};
  std::uint64_t seed{0};
  std::string scenario_hash;
  std::optional<FrameSize> frame;
  std::optional<ReferenceCamera> camera;
  std::vector<DatasetRecord> records;

  [[nodiscard]] std::vector<FeatureObservation> observations() const;
  /// Throws DatasetInvalid unless the layout is planar.
  [[nodiscard]] std::vector<PlanarCorrespondence> planar() const;
};

[[nodiscard]] std::string write_dataset(const Dataset& ds);
/// Throws DatasetInvalid (with line numbers) or DuplicateId.
[[nodiscard]] Dataset parse_dataset(std::string_view text);

// ------------------------------------------------------------ truth sidecar

struct Truth {
  CameraParameters test;  // pose: reticle -> test camera
  FrameSize frame;
  ReferenceCamera reference;
  RotationMatrix reference_rotation{RotationMatrix::Identity()};
  RotationMatrix R_r{RotationMatrix::Identity()};
  EulerAnglesXYZ euler;
};

[[nodiscard]] std::string write_truth(const Truth& t);
[[nodiscard]] Truth parse_truth(std::string_view text);

// ----------------------------------------------------------- field scenario

struct FieldRecord {
  int index{0};
  Direction truth;
  PixelPoint pixel;
};

struct FieldScenario {
  std::uint64_t seed{0};
  Point3 target_m{Point3::Zero()};
  CameraIntrinsics nominal;
  std::vector<FieldRecord> samples;
};

[[nodiscard]] std::string write_field(const FieldScenario& f);
/// Throws DatasetInvalid.
[[nodiscard]] FieldScenario parse_field(std::string_view text);

// ------------------------------------------------------------------ reports

/// Ordered `key value...` lines. The `timestamp` line is the only field that
/// differs between repeated runs.
struct Report {
  std::string kind;
  std::vector<std::pair<std::string, std::vector<std::string>>> lines;

  void add(std::string key, std::vector<std::string> values);
  void add(std::string key, std::initializer_list<double> values);
  [[nodiscard]] const std::vector<std::string>* find(std::string_view key) const;
  /// Throws DatasetInvalid if `key` is missing or has fewer than `n` values.
  [[nodiscard]] std::vector<double> numbers(std::string_view key, std::size_t n) const;
};

[[nodiscard]] std::string write_report(const Report& r);
[[nodiscard]] Report parse_report(std::string_view text);
/// Report text with the timestamp line removed.
[[nodiscard]] std::string strip_timestamp(std::string_view report_text);

/// Throws DatasetInvalid when the report lacks any camera field.
[[nodiscard]] CameraParameters camera_from_report(const Report& r);
[[nodiscard]] RotationMatrix attitude_from_report(const Report& r);

// ------------------------------------------------------------ configuration

/// `key = value` lines; `#` starts a comment. Unknown keys are rejected.
struct Config {
  std::map<std::string, std::string> values;
  std::map<std::string, int> line_of;
};

/// Throws ConfigInvalid naming the line.
[[nodiscard]] Config parse_config(std::string_view text);

struct SimulationConfig {
  SimCamera test{{2677.9, 2678.5, 634.66, 524.12}, {-0.2011, 0.1989}, {1280, 1024}};
  EulerAnglesXYZ test_euler_deg{-1.5324, -0.0632, -0.4851};
  double test_noise_px{0.1};
  SimCamera reference{{5967.7, 5969.0, 1222.4, 1023.5}, {0.2380, 2.0007}, {2448, 2048}};
  EulerAnglesXYZ reference_euler_deg{0.0, 0.0, 0.0};
  double reference_noise_px{0.0};
  ReticleSpec reticle{15, 15, 0.010};
  double collimator_focal_m{0.5};
  OutOfFramePolicy out_of_frame{OutOfFramePolicy::kError};
  Point3 field_target_m{1749.8, 19.3, 3671.8};
  int field_frames{50};
  double field_roll_jitter_deg{2.0};
  double field_fill{0.8};
  double field_noise_px{0.1};
  double nominal_focal_mm{12.0};
  double nominal_pixel_um{4.5};
  DepthRange depth;
  double central_fraction{1.0 / 3.0};
  LMSettings lm;

  /// Throws ConfigInvalid naming the offending field.
  void validate() const;
};

/// Applies recognised keys over the defaults. Throws ConfigInvalid with the
/// line and field for unknown keys or malformed values.
[[nodiscard]] SimulationConfig simulation_config(const Config& cfg);

}  // namespace collcal
