#include "collcal/geometry.hpp"

#include "collcal/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace collcal {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kUsage: return "Usage";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kDatasetInvalid: return "DatasetInvalid";
    case ErrorCode::kMatchError: return "MatchError";
    case ErrorCode::kInsufficientPoints: return "InsufficientPoints";
    case ErrorCode::kDegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kGeometry: return "Geometry";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !std::isfinite(fx)) throw ConfigInvalid("intrinsics: fx must be > 0");
  if (!(fy > 0.0) || !std::isfinite(fy)) throw ConfigInvalid("intrinsics: fy must be > 0");
  if (!std::isfinite(u0) || !std::isfinite(v0))
    throw ConfigInvalid("intrinsics: principal point must be finite");
}

Mat3 CameraIntrinsics::matrix() const {
  Mat3 K;
  K << fx, 0.0, u0,
       0.0, fy, v0,
       0.0, 0.0, 1.0;
  return K;
}

Mat3 CameraIntrinsics::inverse_matrix() const {
  Mat3 Ki;
  Ki << 1.0 / fx, 0.0, -u0 / fx,
        0.0, 1.0 / fy, -v0 / fy,
        0.0, 0.0, 1.0;
  return Ki;
}

Vec2 distortion_offset(const PixelPoint& ideal, const CameraIntrinsics& K,
                       const DistortionCoefficients& d) {
  const double du = ideal.u - K.u0;
  const double dv = ideal.v - K.v0;
  const double x = du / K.fx;
  const double y = dv / K.fy;
  const double r2 = x * x + y * y;
  const double factor = d.k1 * r2 + d.k2 * r2 * r2;
  return {du * factor, dv * factor};
}

PixelPoint distort(const PixelPoint& ideal, const CameraIntrinsics& K,
                   const DistortionCoefficients& d) {
  const Vec2 off = distortion_offset(ideal, K, d);
  return {ideal.u + off.x(), ideal.v + off.y()};
}

PixelPoint undistort(const PixelPoint& observed, const CameraIntrinsics& K,
                     const DistortionCoefficients& d, const UndistortOptions& options) {
  if (d.is_zero()) return observed;
  PixelPoint ideal = observed;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Vec2 off = distortion_offset(ideal, K, d);
    const PixelPoint next{observed.u - off.x(), observed.v - off.y()};
    const double change = std::hypot(next.u - ideal.u, next.v - ideal.v);
    ideal = next;
    if (change < options.tolerance_px) return ideal;
  }
  std::ostringstream msg;
  msg << "undistort: no convergence after " << options.max_iterations << " iterations at ("
      << observed.u << ", " << observed.v << ")";
  throw NonConvergence(msg.str());
}

NormalizedPoint pixel_to_ray(const PixelPoint& p, const CameraIntrinsics& K) {
  return {(p.u - K.u0) / K.fx, (p.v - K.v0) / K.fy};
}

PixelPoint project_camera_point(const Vec3& Pc, const CameraIntrinsics& K,
                                const DistortionCoefficients& d) {
  if (!(Pc.z() > 0.0)) {
    std::ostringstream msg;
    msg << "project: point at camera depth " << Pc.z() << " is behind the camera";
    throw BehindCamera(msg.str());
  }
  const double x = Pc.x() / Pc.z();
  const double y = Pc.y() / Pc.z();
  const double r2 = x * x + y * y;
  const double scale = 1.0 + d.k1 * r2 + d.k2 * r2 * r2;
  return {K.u0 + K.fx * x * scale, K.v0 + K.fy * y * scale};
}

PixelPoint project(const Point3& P, const PoseRT& pose, const CameraIntrinsics& K,
                   const DistortionCoefficients& d) {
  return project_camera_point(pose.apply(P), K, d);
}

Mat3 skew(const Vec3& v) {
  Mat3 S;
  S << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return S;
}

RotationMatrix axis_angle_to_matrix(const AxisAngle& r) {
  const double theta = r.norm();
  if (theta < 1e-6) {
    const Mat3 W = skew(r);
    return RotationMatrix::Identity() + (1.0 - theta * theta / 6.0) * W + (0.5 - theta * theta / 24.0) * (W * W);
  }
  const Mat3 A = skew(r / theta);
  return RotationMatrix::Identity() + std::sin(theta) * A + (1.0 - std::cos(theta)) * (A * A);
}

bool is_rotation(const Mat3& R, double tol) {
  return ((R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol) &&
         std::abs(R.determinant() - 1.0) <= tol;
}

AxisAngle matrix_to_axis_angle(const RotationMatrix& R) {
  if (!is_rotation(R, 1e-6)) throw NotARotation("matrix_to_axis_angle: input is not a rotation");

  const Vec3 w{0.5 * (R(2, 1) - R(1, 2)), 0.5 * (R(0, 2) - R(2, 0)), 0.5 * (R(1, 0) - R(0, 1))};
  const double s = w.norm();
  const double c = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
  const double theta = std::atan2(s, c);

  if (c >= 0.0) {
    // Away from pi the antisymmetric part gives the axis accurately.
    if (s == 0.0) return AxisAngle::Zero();
    return w * (theta / s);
  }

  // Near pi: the symmetric part is cos(theta) I + (1 - cos(theta)) a a^T.
  const Mat3 S = 0.5 * (R + R.transpose());
  const Mat3 aat = (S - c * Mat3::Identity()) / (1.0 - c);
  int k = 0;
  aat.diagonal().maxCoeff(&k);
  Vec3 axis = aat.col(k) / std::sqrt(std::max(aat(k, k), 0.0));
  axis.normalize();

  const double dot = axis.dot(w);
  if (dot < 0.0) {
    axis = -axis;
  } else if (dot == 0.0) {
    for (int i = 0; i < 3; ++i) {
      if (axis(i) != 0.0) {
        if (axis(i) < 0.0) axis = -axis;
        break;
      }
    }
  }
  return axis * theta;
}

RotationMatrix rotation_x_deg(double deg) {
  const double a = deg_to_rad(deg);
  RotationMatrix R;
  R << 1.0, 0.0, 0.0,
       0.0, std::cos(a), -std::sin(a),
       0.0, std::sin(a), std::cos(a);
  return R;
}

RotationMatrix rotation_y_deg(double deg) {
  const double a = deg_to_rad(deg);
  RotationMatrix R;
  R << std::cos(a), 0.0, std::sin(a),
       0.0, 1.0, 0.0,
       -std::sin(a), 0.0, std::cos(a);
  return R;
}

RotationMatrix rotation_z_deg(double deg) {
  const double a = deg_to_rad(deg);
  RotationMatrix R;
  R << std::cos(a), -std::sin(a), 0.0,
       std::sin(a), std::cos(a), 0.0,
       0.0, 0.0, 1.0;
  return R;
}

RotationMatrix euler_xyz_to_matrix(const EulerAnglesXYZ& e) {
  return rotation_z_deg(e.theta_z) * rotation_y_deg(e.theta_y) * rotation_x_deg(e.theta_x);
}

namespace {

double wrap_half_open_deg(double deg) {
  // (-180, 180]
  return deg <= -180.0 ? deg + 360.0 : deg;
}

}  // namespace

EulerAnglesXYZ matrix_to_euler_xyz(const RotationMatrix& R) {
  const double cy = std::hypot(R(0, 0), R(1, 0));
  if (cy < 1e-9) throw GimbalLock("matrix_to_euler_xyz: theta_y is at +-90 degrees");
  return {wrap_half_open_deg(rad_to_deg(std::atan2(R(2, 1), R(2, 2)))),
          wrap_half_open_deg(rad_to_deg(std::atan2(-R(2, 0), cy))),
          wrap_half_open_deg(rad_to_deg(std::atan2(R(1, 0), R(0, 0))))};
}

RotationMatrix nearest_rotation(const Mat3& M) {
  const Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 D = Mat3::Identity();
  D(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return svd.matrixU() * D * svd.matrixV().transpose();
}

double rotation_distance(const RotationMatrix& A, const RotationMatrix& B) {
  return matrix_to_axis_angle(nearest_rotation(A.transpose() * B)).norm();
}

}  // namespace collcal
