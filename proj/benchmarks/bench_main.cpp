#include "collcal/attitude.hpp"
#include "collcal/bundle_adjust.hpp"
#include "collcal/dlt.hpp"
#include "collcal/rng.hpp"
#include "collcal/synthetic_rig.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace collcal;

namespace {

struct Fixture {
  std::vector<Correspondence> corr;
  RegionSplit split;
  InitialCalibration init;
  std::vector<PlanarCorrespondence> planar;
  SimCamera camera;

  Fixture() {
    const SampledScenario s = sample_scenario({}, 42);
    RigScenario rig = s.rig;
    rig.noise_sigma_px = 0.1;
    const CollimatorObservation obs = simulate_collimator_pair(rig, s.reference);
    corr = virtual_control_correspondences(obs, {s.reference.camera.intrinsics, s.reference.camera.distortion}, {}, 7);
    split = split_by_region(corr, rig.true_camera.frame);
    init = calibrate_single_image(split.central, split.edge);
    planar = obs.test.planar;
    camera = rig.true_camera;
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_SolveProjectionMatrix(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(solve_projection_matrix(f.corr));
}
BENCHMARK(BM_SolveProjectionMatrix);

void BM_CalibrateSingleImage(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(calibrate_single_image(f.split.central, f.split.edge));
}
BENCHMARK(BM_CalibrateSingleImage);

void BM_RefineCamera(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(refine_camera(f.init, f.corr));
}
BENCHMARK(BM_RefineCamera)->Unit(benchmark::kMillisecond);

void BM_EstimateHomography(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_homography(f.planar, f.camera.intrinsics, f.camera.distortion));
}
BENCHMARK(BM_EstimateHomography);

void BM_CalibrateAttitude(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(calibrate_attitude(f.planar, f.camera.intrinsics, f.camera.distortion));
}
BENCHMARK(BM_CalibrateAttitude);

void BM_Undistort(benchmark::State& state) {
  const CameraIntrinsics K{2677.9, 2678.5, 634.66, 524.12};
  const DistortionCoefficients d{-0.2011, 0.1989};
  Rng rng(3);
  std::vector<PixelPoint> pts;
  for (int i = 0; i < 1024; ++i) pts.push_back({rng.uniform(0, 1280), rng.uniform(0, 1024)});
  for (auto _ : state)
    for (const auto& p : pts) benchmark::DoNotOptimize(undistort(p, K, d));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()));
}
BENCHMARK(BM_Undistort);

}  // namespace

BENCHMARK_MAIN();
