#include "collcal/dlt.hpp"
#include "collcal/errors.hpp"
#include "collcal/rng.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <string>
#include <vector>

using namespace collcal;

namespace {

const CameraIntrinsics kK{2677.9, 2678.5, 634.66, 524.12};

PoseRT general_pose() {
  return {euler_xyz_to_matrix({4.0, -7.0, 12.0}), Vec3(0.3, -0.2, 6.0)};
}

std::vector<Correspondence> cloud(const CameraIntrinsics& K, const PoseRT& pose, const DistortionCoefficients& d,
                                  int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Correspondence> out;
  for (int i = 0; i < n; ++i) {
    const Point3 X(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    out.push_back({i, project(X, pose, K, d), X});
  }
  return out;
}

void expect_intrinsics_near(const CameraIntrinsics& a, const CameraIntrinsics& b, double rel) {
  EXPECT_NEAR(a.fx, b.fx, rel * b.fx);
  EXPECT_NEAR(a.fy, b.fy, rel * b.fy);
  EXPECT_NEAR(a.u0, b.u0, rel * b.u0);
  EXPECT_NEAR(a.v0, b.v0, rel * b.v0);
}

}  // namespace

TEST(Projection, ComposeDecomposeRoundTrip) {
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const CameraIntrinsics K{rng.uniform(2600, 7600), rng.uniform(2600, 7600), rng.uniform(500, 1300),
                             rng.uniform(400, 1100)};
    const PoseRT pose{euler_xyz_to_matrix({rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(-30, 30)}),
                      Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(1, 10))};
    // Arbitrary scale and sign must not matter.
    ProjectionMatrix P = compose_projection(K, pose);
    P.m *= rng.uniform(-5, 5);
    const InitialCalibration c = decompose_projection(normalize_projection(P));
    expect_intrinsics_near(c.intrinsics, K, 1e-9);
    EXPECT_LT(rotation_distance(c.pose.rotation, pose.rotation), 1e-9);
    EXPECT_LT((c.pose.translation - pose.translation).norm(), 1e-9 * pose.translation.norm());
  }
}

TEST(Projection, NormalisationFixesScaleAndSign) {
  ProjectionMatrix P = compose_projection(kK, general_pose());
  P.m *= -3.0;
  const ProjectionMatrix N = normalize_projection(P);
  EXPECT_NEAR((N.m.block<1, 3>(2, 0).norm()), 1.0, 1e-15);
  EXPECT_GT(N.m.leftCols<3>().determinant(), 0.0);
  EXPECT_DOUBLE_EQ(N[11], N.m(2, 3));
}

TEST(Dlt, RecoversGeneralPoseFromNoiselessPoints) {
  const PoseRT pose = general_pose();
  const auto pts = cloud(kK, pose, {}, 40, 22);
  const ProjectionMatrix M = solve_projection_matrix(pts);
  EXPECT_LT(dlt_system_residual(M, pts), 1e-12);
  EXPECT_TRUE(M.m.isApprox(normalize_projection(compose_projection(kK, pose)).m, 1e-10));
}

TEST(Dlt, MinimalSixPoints) {
  const PoseRT pose = general_pose();
  const auto pts = cloud(kK, pose, {}, 6, 23);
  const ProjectionMatrix M = solve_projection_matrix(pts);
  EXPECT_LT(dlt_system_residual(M, pts), 1e-9);
  const InitialCalibration c = decompose_projection(M);
  expect_intrinsics_near(c.intrinsics, kK, 1e-8);
  EXPECT_LT(rotation_distance(c.pose.rotation, pose.rotation), 1e-8);
}

TEST(Dlt, PureRotationVirtualPoints) {
  // Control points on rays through the camera centre: translation is zero.
  const PoseRT pose{euler_xyz_to_matrix({-1.5324, -0.0632, -0.4851}), Vec3::Zero()};
  Rng rng(24);
  std::vector<Correspondence> pts;
  for (int i = 0; i < 81; ++i) {
    const Vec3 ray(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), 1.0);
    const Point3 X = rng.uniform(100, 1000) * ray;
    pts.push_back({i, project(X, pose, kK, {}), X});
  }
  const InitialCalibration c = decompose_projection(solve_projection_matrix(pts));
  expect_intrinsics_near(c.intrinsics, kK, 1e-6);
  EXPECT_LT(rotation_distance(c.pose.rotation, pose.rotation), 1e-8);
  EXPECT_LT(c.pose.translation.norm(), 1e-5);
}

TEST(Dlt, TooFewPoints) {
  const auto pts = cloud(kK, general_pose(), {}, 5, 25);
  EXPECT_THROW((void)solve_projection_matrix(pts), InsufficientPoints);
}

TEST(Dlt, CoplanarPointsAreDegenerate) {
  auto pts = cloud(kK, general_pose(), {}, 30, 26);
  for (auto& c : pts) {
    c.point.z() = 0.0;
    c.pixel = project(c.point, general_pose(), kK, {});
  }
  EXPECT_THROW((void)solve_projection_matrix(pts), DegenerateConfiguration);
}

TEST(Dlt, DecomposeRejectsNegativeFocal) {
  ProjectionMatrix P;
  P.m << 0, 0, 0, 0,  //
      0, 1, 0, 0,     //
      0, 0, 1, 1;
  EXPECT_THROW((void)decompose_projection(P), InvalidMatrix);
}

TEST(Distortion, LinearInitialisationIsExactForExactPose) {
  const DistortionCoefficients d{-0.2011, 0.1989};
  const PoseRT pose = general_pose();
  const auto pts = cloud(kK, pose, d, 60, 27);
  const DistortionCoefficients k = estimate_initial_distortion(pts, {kK, {}, pose});
  EXPECT_NEAR(k.k1, d.k1, 1e-9);
  EXPECT_NEAR(k.k2, d.k2, 1e-8);
}

TEST(Distortion, SingleRadiusIsRankDeficient) {
  std::vector<Correspondence> pts = {{0, {700, 524.12}, Point3(0.1, 0, 1)}};
  EXPECT_THROW((void)estimate_initial_distortion(pts, {kK, {}, {}}), RankDeficient);
}

TEST(Regions, SplitByFractionOfHalfDiagonal) {
  const FrameSize frame{1280, 1024};
  const double r = frame.half_diagonal() / 3.0;
  std::vector<Correspondence> pts = {{0, {640, 512}, {}},
                                     {1, {640 + r - 1e-9, 512}, {}},
                                     {2, {640 + r + 1e-6, 512}, {}},
                                     {3, {5, 5}, {}}};
  const RegionSplit s = split_by_region(pts, frame);
  ASSERT_EQ(s.central.size(), 2u);
  ASSERT_EQ(s.edge.size(), 2u);
  EXPECT_EQ(s.edge[0].id, 2);
  EXPECT_TRUE(frame.contains({0, 0}));
  EXPECT_FALSE(frame.contains({-0.1, 3}));
  EXPECT_FALSE(frame.contains({3, 1024.5}));
}

TEST(SingleImage, NoiselessPinholeIsExact) {
  const PoseRT pose = general_pose();
  const auto pts = cloud(kK, pose, {}, 60, 28);
  const std::span<const Correspondence> all(pts);
  const InitialCalibration c = calibrate_single_image(all.first(30), all.subspan(30));
  expect_intrinsics_near(c.intrinsics, kK, 1e-6);
  EXPECT_NEAR(c.distortion.k1, 0.0, 1e-6);
  EXPECT_NEAR(c.distortion.k2, 0.0, 1e-6);
}

TEST(Pairing, MatchErrorListsOffenders) {
  std::vector<VirtualControlPoint> vps = {{1, {}, {}}, {2, {}, {}}, {7, {}, {}}};
  std::vector<FeatureObservation> obs = {{1, {}}, {2, {}}, {9, {}}};
  try {
    (void)pair_by_id(vps, obs);
    FAIL() << "expected MatchError";
  } catch (const MatchError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("only in reference: 7"), std::string::npos) << what;
    EXPECT_NE(what.find("only in test: 9"), std::string::npos) << what;
    EXPECT_EQ(e.code(), ErrorCode::kMatchError);
  }
}

TEST(Pairing, JoinsOnIdInReferenceOrder) {
  std::vector<VirtualControlPoint> vps = {{3, Point3(3, 3, 3), {}}, {1, Point3(1, 1, 1), {}}};
  std::vector<FeatureObservation> obs = {{1, {10, 11}}, {3, {30, 31}}};
  const auto c = pair_by_id(vps, obs);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].id, 3);
  EXPECT_EQ(c[0].pixel.u, 30);
  EXPECT_EQ(c[1].point, Point3(1, 1, 1));
  std::vector<FeatureObservation> dup = {{1, {}}, {1, {}}};
  EXPECT_THROW((void)pair_by_id(vps, dup), DuplicateId);
}
