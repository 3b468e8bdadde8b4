#pragma once

// Camera model primitives shared by every solver: pinhole projection with a
// two-term radial distortion, and the rotation conversions used by the
// optimizers and the reports.

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include <span>

namespace collcal {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// 3-D point in metres, in whatever frame the caller states.
using Point3 = Eigen::Vector3d;
/// 3x3 rotation; orthonormal with det +1 wherever the library produces one.
using RotationMatrix = Eigen::Matrix3d;
/// Rotation vector in radians: direction is the axis, norm is the angle.
using AxisAngle = Eigen::Vector3d;

struct CameraIntrinsics {
  double fx{0.0};  // px
  double fy{0.0};  // px
  double u0{0.0};  // principal point column, px
  double v0{0.0};  // principal point row, px

  /// Throws ConfigInvalid unless fx, fy > 0 and the principal point is finite.
  void validate() const;
  [[nodiscard]] Mat3 matrix() const;
  [[nodiscard]] Mat3 inverse_matrix() const;
  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

/// Radial terms of the distortion polynomial. {0, 0} is the ideal pinhole.
struct DistortionCoefficients {
  double k1{0.0};
  double k2{0.0};

  [[nodiscard]] bool is_zero() const noexcept { return k1 == 0.0 && k2 == 0.0; }
  friend bool operator==(const DistortionCoefficients&, const DistortionCoefficients&) = default;
};

struct PixelPoint {
  double u{0.0};
  double v{0.0};

  [[nodiscard]] Vec2 vec() const { return {u, v}; }
  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

/// Image-plane coordinates of the ray [x y 1].
struct NormalizedPoint {
  double x{0.0};
  double y{0.0};

  [[nodiscard]] Vec3 ray() const { return {x, y, 1.0}; }
};

struct PoseRT {
  RotationMatrix rotation{RotationMatrix::Identity()};
  Vec3 translation{Vec3::Zero()};

  [[nodiscard]] Vec3 apply(const Point3& p) const { return rotation * p + translation; }
  [[nodiscard]] static PoseRT identity() { return {}; }
};

/// Everything the forward model needs for one camera view.
struct CameraParameters {
  CameraIntrinsics intrinsics;
  DistortionCoefficients distortion;
  PoseRT pose;
};

/// Euler angles in degrees for R = Rz(theta_z) * Ry(theta_y) * Rx(theta_x).
struct EulerAnglesXYZ {
  double theta_x{0.0};
  double theta_y{0.0};
  double theta_z{0.0};
};

// --- distortion --------------------------------------------------------------

/// Pixel displacement (observed - ideal) produced by the lens at an ideal point.
[[nodiscard]] Vec2 distortion_offset(const PixelPoint& ideal, const CameraIntrinsics& K,
                                     const DistortionCoefficients& d);

/// Ideal (pinhole) pixel -> observed pixel. The radius is taken from the ideal
/// point: observed = ideal + (ideal - pp) * (k1 r^2 + k2 r^4).
[[nodiscard]] PixelPoint distort(const PixelPoint& ideal, const CameraIntrinsics& K,
                                 const DistortionCoefficients& d);

struct UndistortOptions {
  int max_iterations{50};
  double tolerance_px{1e-8};
};

/// Inverse of distort() by fixed-point iteration starting at the observed
/// point. Throws NonConvergence if the iteration cap is reached.
[[nodiscard]] PixelPoint undistort(const PixelPoint& observed, const CameraIntrinsics& K,
                                   const DistortionCoefficients& d,
                                   const UndistortOptions& options = {});

/// Undistorted pixel -> normalized ray coordinates, K^-1 [u v 1].
[[nodiscard]] NormalizedPoint pixel_to_ray(const PixelPoint& p, const CameraIntrinsics& K);

/// Full forward model: rigid transform, perspective divide, distortion,
/// intrinsics. Throws BehindCamera when the camera-frame depth is <= 0.
[[nodiscard]] PixelPoint project(const Point3& P, const PoseRT& pose, const CameraIntrinsics& K,
                                 const DistortionCoefficients& d);

/// Same model starting from a camera-frame point.
[[nodiscard]] PixelPoint project_camera_point(const Vec3& Pc, const CameraIntrinsics& K,
                                              const DistortionCoefficients& d);

// --- rotations ---------------------------------------------------------------

[[nodiscard]] Mat3 skew(const Vec3& v);

/// Rodrigues formula. Norms below 1e-12 return the identity.
[[nodiscard]] RotationMatrix axis_angle_to_matrix(const AxisAngle& r);

/// Canonical axis-angle with norm in [0, pi]. At exactly pi the axis is chosen
/// with its first nonzero component positive. Throws NotARotation when R is not
/// orthonormal within 1e-6 or has negative determinant.
[[nodiscard]] AxisAngle matrix_to_axis_angle(const RotationMatrix& R);

/// Rotation about a principal axis by an angle in degrees.
[[nodiscard]] RotationMatrix rotation_x_deg(double deg);
[[nodiscard]] RotationMatrix rotation_y_deg(double deg);
[[nodiscard]] RotationMatrix rotation_z_deg(double deg);

[[nodiscard]] RotationMatrix euler_xyz_to_matrix(const EulerAnglesXYZ& e);

/// Throws GimbalLock when cos(theta_y) < 1e-9.
[[nodiscard]] EulerAnglesXYZ matrix_to_euler_xyz(const RotationMatrix& R);

/// Closest rotation in Frobenius norm (orthogonal polar factor with det +1).
[[nodiscard]] RotationMatrix nearest_rotation(const Mat3& M);

[[nodiscard]] bool is_rotation(const Mat3& R, double tol = 1e-9);

/// Geodesic angle between two rotations, radians.
[[nodiscard]] double rotation_distance(const RotationMatrix& A, const RotationMatrix& B);

[[nodiscard]] constexpr double deg_to_rad(double deg) noexcept {
  return deg * 0.017453292519943295769;
}
[[nodiscard]] constexpr double rad_to_deg(double rad) noexcept {
  return rad * 57.295779513082320877;
}

}  // namespace collcal
