#pragma once

// Camera attitude from one image of the planar reticle: homography
// estimate, closed-form pose from the homography, LM refinement of the pose
// with the camera model frozen, and the transfer of the target-frame rotation
// to the device reference frame.

#include "collcal/geometry.hpp"
#include "collcal/lm.hpp"
#include "collcal/virtual_points.hpp"

#include <span>

namespace collcal {

struct PlanarCorrespondence {
  FeatureId id{0};
  PixelPoint pixel;  // observed (distorted)
  Vec2 target{Vec2::Zero()};  // (Xt, Yt) on the reticle plane, metres
};

struct Homography {
  Mat3 h{Mat3::Identity()};  // target plane (Xt, Yt, 1) -> undistorted pixel
};

struct AttitudeResult {
  RotationMatrix R_t{RotationMatrix::Identity()};  // target -> camera
  Vec3 t_t{Vec3::Zero()};
  RotationMatrix R_r{RotationMatrix::Identity()};  // reference -> camera; equals R_t
  EulerAnglesXYZ euler;  // of R_r
  double rms_px{0.0};
  double max_px{0.0};
  LMSummary summary;
};

/// Yaw/pitch of a direction in the reference frame (z forward, x right,
/// y down): yaw = atan2(x, z), pitch = atan2(-y, hypot(x, z)), degrees.
struct Direction {
  double yaw_deg{0.0};
  double pitch_deg{0.0};
};

/// Pixels are undistorted with (K, d) first. Both point sets are normalised
/// (centroid, mean distance sqrt(2)) and H is the smallest right singular
/// vector of the stacked 2n x 9 system, denormalised, scaled to unit
/// Frobenius norm with h33 >= 0.
/// Throws InsufficientPoints (< 4) or DegenerateConfiguration (collinear).
[[nodiscard]] Homography estimate_homography(std::span<const PlanarCorrespondence> pts,
                                             const CameraIntrinsics& K,
                                             const DistortionCoefficients& d);

struct PlanarPose {
  RotationMatrix rotation{RotationMatrix::Identity()};
  Vec3 translation{Vec3::Zero()};
};

/// r1, r2 from the normalised columns of K^-1 H, r3 = r1 x r2, translation
/// scaled by 1 / |K^-1 h1| so it stays metric. The global sign is chosen so
/// the target point `centroid` has positive depth; the rotation is projected
/// onto SO(3). Throws BehindCamera if that depth is zero.
[[nodiscard]] PlanarPose decompose_homography(const Homography& H, const CameraIntrinsics& K,
                                              const Vec2& centroid = Vec2::Zero());

/// LM over (rotation vector, translation) with K and d frozen and a plain
/// squared cost. Throws NotConverged / DivergedBehindCamera.
[[nodiscard]] AttitudeResult refine_pose(const CameraIntrinsics& K, const DistortionCoefficients& d,
                                         const PlanarPose& init,
                                         std::span<const PlanarCorrespondence> pts,
                                         const LMSettings& settings = {});

/// Homography, decomposition, refinement.
[[nodiscard]] AttitudeResult calibrate_attitude(std::span<const PlanarCorrespondence> pts,
                                                const CameraIntrinsics& K,
                                                const DistortionCoefficients& d,
                                                const LMSettings& settings = {});

[[nodiscard]] Direction direction_of(const Vec3& reference_frame_vector);

/// Undistort, back-project, rotate into the reference frame with R_r^T.
[[nodiscard]] Direction target_direction(const CameraIntrinsics& K, const DistortionCoefficients& d,
                                         const RotationMatrix& R_r, const PixelPoint& pixel);

}  // namespace collcal
