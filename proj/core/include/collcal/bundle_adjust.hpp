#pragma once

// Nonlinear refinement of a single camera view (intrinsics, radial
// distortion, rotation vector, translation) against fixed 3-D control
// points, minimising robust reprojection error.

#include "collcal/dlt.hpp"
#include "collcal/errors.hpp"
#include "collcal/geometry.hpp"
#include "collcal/lm.hpp"

#include <Eigen/Core>

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace collcal {

struct PointResidual {
  FeatureId id{0};
  Vec2 residual{Vec2::Zero()};  // observed - predicted, px

  [[nodiscard]] double norm() const { return residual.norm(); }
};

/// rms = sqrt(mean over points of |residual|^2), i.e. the 2-D norm per point.
struct ReprojectionStats {
  double rms_px{0.0};
  double max_px{0.0};
  std::vector<PointResidual> per_point;
};

struct RefinedCalibration {
  CameraIntrinsics intrinsics;
  DistortionCoefficients distortion;
  PoseRT pose;
  double rms_reprojection_px{0.0};
  double max_reprojection_px{0.0};
  std::vector<PointResidual> per_point_residuals;
  LMSummary summary;

  [[nodiscard]] CameraParameters parameters() const { return {intrinsics, distortion, pose}; }
};

[[nodiscard]] ReprojectionStats reprojection_stats(const CameraParameters& params,
                                                   std::span<const Correspondence> obs);

/// Parameter vector layout used by the camera refinement:
/// [fx, fy, u0, v0, k1, k2, rx, ry, rz, tx, ty, tz].
inline constexpr int kCameraParameterCount = 12;

[[nodiscard]] Eigen::VectorXd pack_camera(const CameraParameters& params);
[[nodiscard]] CameraParameters unpack_camera(const Eigen::VectorXd& x);

/// Residuals (observed - predicted, 2 per point) and their analytic Jacobian
/// with respect to the packed camera vector. Returns false if any point has
/// non-positive depth.
bool camera_residuals(const Eigen::VectorXd& x, std::span<const Correspondence> obs,
                      Eigen::VectorXd& residuals, Eigen::MatrixXd* jacobian);

/// Derivative of R(r) * p with respect to the rotation vector r.
[[nodiscard]] Mat3 rotate_point_jacobian(const AxisAngle& r, const Vec3& p);

/// Throws InsufficientPoints (< 8 points), NotConverged when the iteration cap
/// is hit, DivergedBehindCamera when no step keeps the points in front.
[[nodiscard]] RefinedCalibration refine_camera(const CameraParameters& init,
                                               std::span<const Correspondence> obs,
                                               const RobustCost& cost = {},
                                               const LMSettings& settings = {});

class NotConverged : public NonConvergence {
 public:
  NotConverged(const std::string& what, LMSummary summary)
      : NonConvergence(what), summary_(std::move(summary)) {}
  [[nodiscard]] const LMSummary& summary() const noexcept { return summary_; }

 private:
  LMSummary summary_;
};

class DivergedBehindCamera : public BehindCamera {
 public:
  using BehindCamera::BehindCamera;
};

/// Raises NotConverged / DivergedBehindCamera for non-converged summaries.
void throw_if_failed(const LMSummary& summary, std::string_view who);

}  // namespace collcal
