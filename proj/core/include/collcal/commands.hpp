#pragma once

// The four pipeline commands, usable in memory or against files.

#include "collcal/formats.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace collcal {

[[nodiscard]] std::string_view version_string() noexcept;

// ---------------------------------------------------------------- in memory

struct SimulationOutput {
  Dataset reference;
  Dataset test;
  Truth truth;
  FieldScenario field;
};

/// Sub-seeds: "rig", "reference", "field".
[[nodiscard]] SimulationOutput simulate(const SimulationConfig& cfg, std::uint64_t seed);

struct CameraCalibration {
  InitialCalibration initial;
  RefinedCalibration refined;
  std::size_t central_points{0};
  std::size_t edge_points{0};
};

/// Virtual control points from the reference dataset (sub-seed
/// "virtual_points"), region split, single-image DLT, bundle adjustment.
[[nodiscard]] CameraCalibration calibrate_camera(const Dataset& reference, const Dataset& test,
                                                 const SimulationConfig& cfg, const RobustCost& cost,
                                                 std::uint64_t seed);

[[nodiscard]] AttitudeResult calibrate_attitude(const Dataset& test, const CameraParameters& camera,
                                                const LMSettings& settings = {});

struct ErrorStats {
  double mean_abs_deg{0.0};
  double std_deg{0.0};  // of the absolute differences, n - 1 denominator
};

struct EvaluationSample {
  int index{0};
  Direction truth;
  Direction nominal;
  Direction calibrated;
};

struct Evaluation {
  ErrorStats nominal_yaw;
  ErrorStats nominal_pitch;
  ErrorStats calibrated_yaw;
  ErrorStats calibrated_pitch;
  double yaw_reduction{0.0};
  double pitch_reduction{0.0};
  /// 1 - (calibrated yaw + pitch mean) / (nominal yaw + pitch mean).
  double overall_reduction{0.0};
  std::vector<EvaluationSample> samples;
};

/// Nominal group: the field file's nominal intrinsics, zero distortion,
/// identity attitude. Calibrated group: the given camera and R_r.
[[nodiscard]] Evaluation evaluate(const FieldScenario& field, const CameraParameters& camera,
                                  const RotationMatrix& R_r);

// ------------------------------------------------------------------ reports

struct InputDigest {
  std::string role;
  std::string value;
};

[[nodiscard]] Report camera_report(const CameraCalibration& c, const RobustCost& cost, std::uint64_t seed,
                                   const std::vector<InputDigest>& inputs);
[[nodiscard]] Report attitude_report(const AttitudeResult& a, const CameraParameters& camera,
                                     std::uint64_t seed, const std::vector<InputDigest>& inputs);
[[nodiscard]] Report evaluation_report(const Evaluation& e, std::uint64_t seed,
                                       const std::vector<InputDigest>& inputs);
/// Fixed-width text table of the evaluation, for the terminal.
[[nodiscard]] std::string evaluation_table(const Evaluation& e);

/// Inserts `timestamp <UTC ISO-8601>` after the tool line.
void stamp(Report& r, const std::string& timestamp);
[[nodiscard]] std::string utc_now();

// -------------------------------------------------------------------- files

struct RunOptions {
  std::uint64_t seed{0};
  std::optional<std::filesystem::path> config;
  std::filesystem::path output{"."};
  RobustCost cost;
};

/// Writes reference.txt, test.txt, field.txt and the truth.txt sidecar.
std::vector<std::filesystem::path> run_simulate(const RunOptions& opt);
/// Writes camera_report.txt.
std::filesystem::path run_calibrate_camera(const RunOptions& opt, const std::filesystem::path& reference,
                                           const std::filesystem::path& test);
/// Writes attitude_report.txt.
std::filesystem::path run_calibrate_attitude(const RunOptions& opt, const std::filesystem::path& test,
                                             const std::filesystem::path& camera_report);
/// Writes evaluation.txt and returns the table for display.
std::string run_evaluate(const RunOptions& opt, const std::filesystem::path& attitude_report,
                         const std::filesystem::path& camera_report, const std::filesystem::path& field);

}  // namespace collcal
