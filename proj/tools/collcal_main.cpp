// collcal: simulate, calibrate-camera, calibrate-attitude, evaluate.

#include "collcal/commands.hpp"
#include "collcal/errors.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

constexpr int kInternalError = 1;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collimator-based camera and attitude calibration"};
  app.set_version_flag("--version", std::string(collcal::version_string()));
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string config;
  std::string output = ".";
  std::string cost = "huber";
  double huber_delta = 1.0;
  app.add_option("--seed", seed, "Random seed (unsigned 64-bit)");
  app.add_option("--config", config, "Configuration file (key = value)");
  app.add_option("--output", output, "Output directory")->capture_default_str();
  app.add_option("--cost", cost, "Bundle adjustment cost")
      ->check(CLI::IsMember({"squared", "huber"}))
      ->capture_default_str();
  app.add_option("--huber-delta", huber_delta, "Huber threshold in pixels")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Write synthetic datasets and the truth sidecar");
  simulate->fallthrough();

  std::string reference_path, test_path;
  auto* camera = app.add_subcommand("calibrate-camera", "Camera intrinsics, distortion and pose");
  camera->fallthrough();
  camera->add_option("reference", reference_path, "Reference camera dataset")->required()->check(CLI::ExistingFile);
  camera->add_option("test", test_path, "Test camera dataset")->required()->check(CLI::ExistingFile);

  std::string att_test_path, camera_report_path;
  auto* attitude = app.add_subcommand("calibrate-attitude", "Camera attitude from the planar reticle");
  attitude->fallthrough();
  attitude->add_option("test", att_test_path, "Test camera dataset")->required()->check(CLI::ExistingFile);
  attitude->add_option("camera_report", camera_report_path, "Camera report")->required()->check(CLI::ExistingFile);

  std::string eval_attitude, eval_camera, eval_field;
  auto* evaluate = app.add_subcommand("evaluate", "Compare nominal and calibrated target directions");
  evaluate->fallthrough();
  evaluate->add_option("attitude_report", eval_attitude, "Attitude report")->required()->check(CLI::ExistingFile);
  evaluate->add_option("camera_report", eval_camera, "Camera report")->required()->check(CLI::ExistingFile);
  evaluate->add_option("field", eval_field, "Field scenario")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(collcal::ErrorCode::kUsage);
  }

  collcal::RunOptions opt;
  opt.output = output;
  if (!config.empty()) opt.config = config;
  opt.cost = cost == "squared" ? collcal::RobustCost::squared() : collcal::RobustCost::huber(huber_delta);

  const bool needs_seed = simulate->parsed() || camera->parsed();
  if (needs_seed && !seed) {
    std::cerr << "error: --seed is required for " << (simulate->parsed() ? "simulate" : "calibrate-camera")
              << '\n';
    return static_cast<int>(collcal::ErrorCode::kUsage);
  }
  opt.seed = seed.value_or(0);

  try {
    if (simulate->parsed()) {
      for (const auto& p : collcal::run_simulate(opt)) std::cout << "wrote " << p.string() << '\n';
    } else if (camera->parsed()) {
      std::cout << "wrote " << collcal::run_calibrate_camera(opt, reference_path, test_path).string() << '\n';
    } else if (attitude->parsed()) {
      std::cout << "wrote " << collcal::run_calibrate_attitude(opt, att_test_path, camera_report_path).string()
                << '\n';
    } else if (evaluate->parsed()) {
      std::cout << collcal::run_evaluate(opt, eval_attitude, eval_camera, eval_field);
      std::cout << "wrote " << (opt.output / "evaluation.txt").string() << '\n';
    }
  } catch (const collcal::Error& e) {
    std::cerr << "error [" << collcal::to_string(e.code()) << "]: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error [internal]: " << e.what() << '\n';
    return kInternalError;
  }
  return 0;
}
