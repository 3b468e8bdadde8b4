#include "collcal/commands.hpp"
#include "collcal/errors.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace collcal;

namespace {

SimulationConfig noiseless() {
  SimulationConfig cfg;
  cfg.test_noise_px = 0.0;
  cfg.reference_noise_px = 0.0;
  cfg.field_noise_px = 0.0;
  return cfg;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("collcal_unit_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Simulate, WritesConsistentDatasets) {
  const SimulationOutput sim = simulate({}, 3);
  EXPECT_EQ(sim.test.records.size(), 225u);
  EXPECT_EQ(sim.reference.records.size(), 225u);
  EXPECT_TRUE(sim.reference.camera.has_value());
  EXPECT_EQ(sim.test.scenario_hash, sim.reference.scenario_hash);
  EXPECT_EQ(sim.field.samples.size(), 50u);
  EXPECT_NEAR(sim.truth.euler.theta_x, -1.5324, 1e-12);
  // Same seed, same bytes.
  const SimulationOutput again = simulate({}, 3);
  EXPECT_EQ(write_dataset(sim.test), write_dataset(again.test));
  EXPECT_EQ(write_field(sim.field), write_field(again.field));
  EXPECT_NE(write_dataset(sim.test), write_dataset(simulate({}, 4).test));
}

TEST(CalibrateCamera, NoiselessPairIsExact) {
  const SimulationOutput sim = simulate(noiseless(), 5);
  const CameraCalibration c = calibrate_camera(sim.reference, sim.test, noiseless(), {}, 5);
  EXPECT_LT(c.refined.rms_reprojection_px, 1e-9);
  const auto& K = c.refined.intrinsics;
  EXPECT_NEAR(K.fx, 2677.9, 1e-6 * 2677.9);
  EXPECT_NEAR(K.v0, 524.12, 1e-6 * 524.12);
  EXPECT_NEAR(c.refined.distortion.k1, -0.2011, 1e-6);
  EXPECT_EQ(c.central_points + c.edge_points, 225u);
}

TEST(CalibrateCamera, NoisyPairRmsNearExpected) {
  const SimulationOutput sim = simulate({}, 6);
  const CameraCalibration c = calibrate_camera(sim.reference, sim.test, {}, {}, 6);
  EXPECT_LE(c.refined.rms_reprojection_px, 0.16);
  EXPECT_GE(c.refined.rms_reprojection_px, 0.12);
}

TEST(CalibrateCamera, InputErrors) {
  SimulationOutput sim = simulate(noiseless(), 7);
  Dataset no_cam = sim.reference;
  no_cam.camera.reset();
  EXPECT_THROW((void)calibrate_camera(no_cam, sim.test, {}, {}, 7), DatasetInvalid);
  EXPECT_THROW((void)calibrate_camera(sim.test, sim.reference, {}, {}, 7), DatasetInvalid);
  Dataset missing = sim.test;
  missing.records.erase(missing.records.begin() + 10);
  missing.records.back().id = 9999;
  EXPECT_THROW((void)calibrate_camera(sim.reference, missing, {}, {}, 7), MatchError);
}

TEST(CalibrateAttitude, NoiselessEulerAndTooFewPoints) {
  const SimulationOutput sim = simulate(noiseless(), 8);
  const CameraCalibration c = calibrate_camera(sim.reference, sim.test, noiseless(), {}, 8);
  const AttitudeResult a = calibrate_attitude(sim.test, c.refined.parameters());
  EXPECT_NEAR(a.euler.theta_x, -1.5324, 1e-6);
  EXPECT_NEAR(a.euler.theta_y, -0.0632, 1e-6);
  EXPECT_NEAR(a.euler.theta_z, -0.4851, 1e-6);

  Dataset three = sim.test;
  three.records.resize(3);
  EXPECT_THROW((void)calibrate_attitude(three, c.refined.parameters()), InsufficientPoints);
}

TEST(Evaluate, TruthParametersGiveZeroDifferences) {
  const SimulationOutput sim = simulate(noiseless(), 9);
  const Evaluation e = evaluate(sim.field, sim.truth.test, sim.truth.R_r);
  EXPECT_LT(e.calibrated_yaw.mean_abs_deg, 1e-9);
  EXPECT_LT(e.calibrated_pitch.mean_abs_deg, 1e-9);
  EXPECT_GT(e.nominal_pitch.mean_abs_deg, 0.5);
  EXPECT_NEAR(e.overall_reduction, 1.0, 1e-8);
}

TEST(Evaluate, CalibratedBeatsNominal) {
  const SimulationOutput sim = simulate({}, 10);
  const CameraCalibration c = calibrate_camera(sim.reference, sim.test, {}, {}, 10);
  const AttitudeResult a = calibrate_attitude(sim.test, c.refined.parameters());
  const Evaluation e = evaluate(sim.field, c.refined.parameters(), a.R_r);
  EXPECT_LT(e.calibrated_yaw.mean_abs_deg, e.nominal_yaw.mean_abs_deg);
  EXPECT_LT(e.calibrated_pitch.mean_abs_deg, e.nominal_pitch.mean_abs_deg);
  EXPECT_GT(e.overall_reduction, 0.5);
  const Report r = evaluation_report(e, 10, {});
  EXPECT_NE(r.find("reduction"), nullptr);
  EXPECT_NE(evaluation_table(e).find("std/deg"), std::string::npos);
}

TEST(Files, PipelineThroughDiskIsDeterministic) {
  RunOptions opt;
  opt.seed = 11;
  opt.output = scratch("a");
  run_simulate(opt);
  const auto cam = run_calibrate_camera(opt, opt.output / "reference.txt", opt.output / "test.txt");
  const auto att = run_calibrate_attitude(opt, opt.output / "test.txt", cam);
  (void)run_evaluate(opt, att, cam, opt.output / "field.txt");

  RunOptions again = opt;
  again.output = scratch("b");
  run_simulate(again);
  const auto cam2 = run_calibrate_camera(again, again.output / "reference.txt", again.output / "test.txt");
  const auto att2 = run_calibrate_attitude(again, again.output / "test.txt", cam2);
  (void)run_evaluate(again, att2, cam2, again.output / "field.txt");

  for (const char* f : {"reference.txt", "test.txt", "field.txt", "truth.txt", "camera_report.txt",
                        "attitude_report.txt", "evaluation.txt"}) {
    EXPECT_EQ(strip_timestamp(read_file(opt.output / f)), strip_timestamp(read_file(again.output / f))) << f;
  }
  const Report r = parse_report(read_file(cam));
  ASSERT_NE(r.find("timestamp"), nullptr);
  EXPECT_EQ(r.lines[1].first, "timestamp");
}

TEST(Files, MissingInputIsAnIoError) {
  RunOptions opt;
  opt.output = scratch("c");
  EXPECT_THROW((void)run_calibrate_camera(opt, "/nonexistent/ref.txt", "/nonexistent/test.txt"), IoError);
  opt.config = "/nonexistent/config.txt";
  EXPECT_THROW((void)run_simulate(opt), IoError);
}

TEST(ErrorCodes, DistinctPerClass) {
  const std::vector<int> codes = {ConfigInvalid("").exit_code(),      DatasetInvalid("").exit_code(),
                                  MatchError("").exit_code(),         InsufficientPoints("").exit_code(),
                                  DegenerateConfiguration("").exit_code(), NonConvergence("").exit_code(),
                                  GeometryError("").exit_code(),      IoError("").exit_code()};
  for (std::size_t i = 0; i < codes.size(); ++i) {
    EXPECT_GT(codes[i], 2);
    for (std::size_t j = i + 1; j < codes.size(); ++j) EXPECT_NE(codes[i], codes[j]);
  }
  EXPECT_EQ(DuplicateId("").exit_code(), DatasetInvalid("").exit_code());
  EXPECT_EQ(BehindCamera("").exit_code(), GeometryError("").exit_code());
}
