#include "collcal/errors.hpp"
#include "collcal/rng.hpp"
#include "collcal/synthetic_rig.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace collcal;

namespace {

RigScenario table2_rig(double sigma = 0.0) {
  RigScenario rig;
  rig.true_camera = {{2677.9, 2678.5, 634.66, 524.12}, {-0.2011, 0.1989}, {1280, 1024}};
  rig.true_pose = collimator_pose(euler_xyz_to_matrix({-1.5324, -0.0632, -0.4851}), 0.5);
  rig.reticle = {15, 15, 0.010};
  rig.noise_sigma_px = sigma;
  rig.seed = 77;
  return rig;
}

ReferenceScenario reference(double sigma = 0.0) {
  ReferenceScenario ref;
  ref.camera = {{5967.7, 5969.0, 1222.4, 1023.5}, {0.2380, 2.0007}, {2448, 2048}};
  ref.rotation = euler_xyz_to_matrix({0.2, -0.1, 0.3});
  ref.noise_sigma_px = sigma;
  ref.seed = 78;
  return ref;
}

}  // namespace

TEST(Reticle, RowMajorCentredGrid) {
  const ReticleSpec r{3, 5, 0.01};
  EXPECT_EQ(r.size(), 15);
  EXPECT_TRUE(r.position(0).isApprox(Vec2(-0.02, -0.01)));
  EXPECT_TRUE(r.position(7).isApprox(Vec2(0.0, 0.0)));
  EXPECT_TRUE(r.position(14).isApprox(Vec2(0.02, 0.01)));
  EXPECT_THROW((ReticleSpec{15, 15, -0.01}.validate()), ConfigInvalid);
  EXPECT_THROW((ReticleSpec{1, 15, 0.01}.validate()), ConfigInvalid);
}

TEST(Rig, CollimatorPoseCentresTheAxis) {
  const PoseRT p = collimator_pose(rotation_x_deg(2.0), 0.5);
  // The camera centre sits on the reticle normal at distance F.
  EXPECT_NEAR(p.translation.norm(), 0.5, 1e-15);
  EXPECT_TRUE((-p.rotation.transpose() * p.translation).isApprox(Vec3(0, 0, -0.5), 1e-15));
}

TEST(Rig, NoiselessObservationEqualsProjection) {
  const RigScenario rig = table2_rig();
  const ReticleObservation obs = simulate_reticle_observation(rig);
  ASSERT_EQ(obs.planar.size(), 225u);
  EXPECT_TRUE(obs.out_of_frame.empty());
  for (const auto& p : obs.planar) {
    const PixelPoint q = project(Point3(p.target.x(), p.target.y(), 0.0), rig.true_pose,
                                 rig.true_camera.intrinsics, rig.true_camera.distortion);
    EXPECT_EQ(p.pixel, q);
  }
}

TEST(Rig, NoiseIsSeededGaussian) {
  const RigScenario clean = table2_rig();
  const RigScenario noisy = table2_rig(0.1);
  const auto a = simulate_reticle_observation(clean);
  const auto b = simulate_reticle_observation(noisy);
  const auto c = simulate_reticle_observation(noisy);
  Rng rng(derive_seed(noisy.seed, "test_noise"));
  double ss = 0.0;
  for (std::size_t i = 0; i < a.planar.size(); ++i) {
    const Vec2 e = b.planar[i].pixel.vec() - a.planar[i].pixel.vec();
    EXPECT_NEAR(e.x(), 0.1 * rng.normal(), 1e-9);
    EXPECT_NEAR(e.y(), 0.1 * rng.normal(), 1e-9);
    EXPECT_EQ(b.planar[i].pixel, c.planar[i].pixel);
    ss += e.squaredNorm();
  }
  EXPECT_NEAR(std::sqrt(ss / (2.0 * a.planar.size())), 0.1, 0.015);
}

TEST(Rig, OutOfFramePolicies) {
  RigScenario rig = table2_rig();
  rig.reticle.pitch_m = 0.03;
  EXPECT_THROW((void)simulate_reticle_observation(rig), PointOutsideFrame);
  rig.out_of_frame = OutOfFramePolicy::kDrop;
  const auto obs = simulate_reticle_observation(rig);
  EXPECT_FALSE(obs.out_of_frame.empty());
  EXPECT_EQ(obs.planar.size() + obs.out_of_frame.size(), 225u);
  for (const auto& p : obs.planar) EXPECT_TRUE(rig.true_camera.frame.contains(p.pixel));
}

TEST(Rig, TestViewIsAPureRotationOfTheReferenceView) {
  const RigScenario rig = table2_rig();
  const ReferenceScenario ref = reference();
  const CollimatorObservation obs = simulate_collimator_pair(rig, ref);
  EXPECT_TRUE(obs.test_from_reference.translation.isZero(1e-15));
  EXPECT_LT(rotation_distance(obs.test_from_reference.rotation,
                              rig.true_pose.rotation * ref.rotation.transpose()),
            1e-15);
  // Any depth along a reference ray projects to the same test pixel.
  const ReferenceCamera cam{ref.camera.intrinsics, ref.camera.distortion};
  const auto corr = virtual_control_correspondences(obs, cam, {}, 5);
  ASSERT_EQ(corr.size(), 225u);
  for (const auto& c : corr) {
    const PixelPoint p = project(c.point, obs.test_from_reference, rig.true_camera.intrinsics,
                                 rig.true_camera.distortion);
    EXPECT_NEAR(p.u, c.pixel.u, 1e-6);
    EXPECT_NEAR(p.v, c.pixel.v, 1e-6);
  }
}

TEST(Rig, TrueReferenceRotationComposesBenchOffset) {
  RigScenario rig = table2_rig();
  EXPECT_EQ(true_reference_rotation(rig), rig.true_pose.rotation);
  rig.reference_to_target = rotation_z_deg(0.1);
  EXPECT_TRUE(true_reference_rotation(rig).isApprox(rig.true_pose.rotation * rotation_z_deg(0.1)));
}

TEST(Field, SequenceKeepsTargetInFrameAndTruthConsistent) {
  const RigScenario rig = table2_rig();
  const Point3 target(1749.8, 19.3, 3671.8);
  const auto frames = field_sequence(rig, target, 100, 2.0, 0.8, 9);
  ASSERT_EQ(frames.size(), 100u);
  for (const auto& f : frames) {
    const FieldSample s = simulate_field_test(rig, f);
    EXPECT_TRUE(rig.true_camera.frame.contains(s.observed_pixel));
    const Direction d = target_direction(rig.true_camera.intrinsics, rig.true_camera.distortion, f.true_R_r,
                                         s.observed_pixel);
    EXPECT_NEAR(d.yaw_deg, s.truth.yaw_deg, 1e-8);
    EXPECT_NEAR(d.pitch_deg, s.truth.pitch_deg, 1e-8);
    const Direction expected = direction_of(f.device_attitude * target);
    EXPECT_DOUBLE_EQ(s.truth.yaw_deg, expected.yaw_deg);
  }
}

TEST(Field, TargetBehindCameraThrows) {
  const RigScenario rig = table2_rig();
  TargetScenario t;
  t.target_position_m = Point3(0, 0, -100);
  t.true_R_r = rig.true_pose.rotation;
  EXPECT_THROW((void)simulate_field_test(rig, t), BehindCamera);
  t.target_position_m = Point3(100, 0, 100);
  EXPECT_THROW((void)simulate_field_test(rig, t), PointOutsideFrame);
}

TEST(Nominal, EquivalentFocalOverPixelSize) {
  const NominalCamera n = build_nominal_intrinsics(12.0, 4.5, 1280, 1024);
  EXPECT_NEAR(n.intrinsics.fx, 2666.7, 0.05);
  EXPECT_DOUBLE_EQ(n.intrinsics.fx, n.intrinsics.fy);
  EXPECT_DOUBLE_EQ(n.intrinsics.u0, 640.0);
  EXPECT_DOUBLE_EQ(n.intrinsics.v0, 512.0);
  EXPECT_TRUE(n.distortion.is_zero());
  EXPECT_THROW((void)build_nominal_intrinsics(0.0, 4.5, 1280, 1024), ConfigInvalid);
}

TEST(Scenarios, SampledScenariosRespectBoundsAndFitTheFrame) {
  const ScenarioBounds b;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const SampledScenario s = sample_scenario(b, seed);
    const auto& K = s.rig.true_camera.intrinsics;
    EXPECT_GE(K.fx, b.focal_min_px);
    EXPECT_LT(K.fx, b.focal_max_px);
    EXPECT_LE(std::abs(K.fy / K.fx - 1.0), b.aspect_jitter);
    EXPECT_LE(std::abs(s.rig.true_camera.distortion.k1), b.k1_abs_max);
    EXPECT_LE(std::abs(s.rig.true_camera.distortion.k2), b.k2_abs_max);
    const auto obs = simulate_collimator_pair(s.rig, s.reference);
    EXPECT_EQ(obs.test.planar.size(), 225u);
  }
}
