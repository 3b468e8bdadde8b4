#include "collcal/bundle_adjust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace collcal {

ReprojectionStats reprojection_stats(const CameraParameters& params,
                                     std::span<const Correspondence> obs) {
  ReprojectionStats stats;
  stats.per_point.reserve(obs.size());
  double sum_sq = 0.0;
  for (const auto& c : obs) {
    const PixelPoint pred = project(c.point, params.pose, params.intrinsics, params.distortion);
    const Vec2 e = c.pixel.vec() - pred.vec();
    stats.per_point.push_back({c.id, e});
    sum_sq += e.squaredNorm();
    stats.max_px = std::max(stats.max_px, e.norm());
  }
  if (!obs.empty()) stats.rms_px = std::sqrt(sum_sq / static_cast<double>(obs.size()));
  return stats;
}

Eigen::VectorXd pack_camera(const CameraParameters& params) {
  Eigen::VectorXd x(kCameraParameterCount);
  const auto& K = params.intrinsics;
  const AxisAngle r = matrix_to_axis_angle(params.pose.rotation);
  x << K.fx, K.fy, K.u0, K.v0, params.distortion.k1, params.distortion.k2, r.x(), r.y(), r.z(),
      params.pose.translation.x(), params.pose.translation.y(), params.pose.translation.z();
  return x;
}

CameraParameters unpack_camera(const Eigen::VectorXd& x) {
  CameraParameters p;
  p.intrinsics = {x(0), x(1), x(2), x(3)};
  p.distortion = {x(4), x(5)};
  p.pose.rotation = axis_angle_to_matrix(x.segment<3>(6));
  p.pose.translation = x.segment<3>(9);
  return p;
}

Mat3 rotate_point_jacobian(const AxisAngle& r, const Vec3& p) {
  // d(R(r) p)/dr = -R [p]x Jr(r), with Jr the right Jacobian of SO(3).
  const double theta = r.norm();
  const Mat3 W = skew(r);
  Mat3 Jr;
  if (theta < 1e-6) {
    Jr = Mat3::Identity() - 0.5 * W + (1.0 / 6.0) * W * W;
  } else {
    const double t2 = theta * theta;
    Jr = Mat3::Identity() - ((1.0 - std::cos(theta)) / t2) * W +
         ((theta - std::sin(theta)) / (t2 * theta)) * W * W;
  }
  return -axis_angle_to_matrix(r) * skew(p) * Jr;
}

bool camera_residuals(const Eigen::VectorXd& x, std::span<const Correspondence> obs,
                      Eigen::VectorXd& residuals, Eigen::MatrixXd* jacobian) {
  const double fx = x(0), fy = x(1), u0 = x(2), v0 = x(3), k1 = x(4), k2 = x(5);
  const AxisAngle rvec = x.segment<3>(6);
  const Vec3 t = x.segment<3>(9);
  const Mat3 R = axis_angle_to_matrix(rvec);

  const auto n = static_cast<Eigen::Index>(obs.size());
  residuals.resize(2 * n);
  if (jacobian) jacobian->setZero(2 * n, kCameraParameterCount);

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = obs[static_cast<std::size_t>(i)];
    const Vec3 Pc = R * c.point + t;
    if (!(Pc.z() > 0.0)) return false;
    const double iz = 1.0 / Pc.z();
    const double xn = Pc.x() * iz;
    const double yn = Pc.y() * iz;
    const double r2 = xn * xn + yn * yn;
    const double s = 1.0 + k1 * r2 + k2 * r2 * r2;
    residuals(2 * i) = c.pixel.u - (u0 + fx * xn * s);
    residuals(2 * i + 1) = c.pixel.v - (v0 + fy * yn * s);

    if (!jacobian) continue;
    auto Ju = jacobian->row(2 * i);
    auto Jv = jacobian->row(2 * i + 1);
    // Derivatives of the prediction; residual Jacobian is the negative.
    Ju(0) = -xn * s;
    Jv(1) = -yn * s;
    Ju(2) = -1.0;
    Jv(3) = -1.0;
    Ju(4) = -fx * xn * r2;
    Ju(5) = -fx * xn * r2 * r2;
    Jv(4) = -fy * yn * r2;
    Jv(5) = -fy * yn * r2 * r2;

    const double ds_dr2 = k1 + 2.0 * k2 * r2;
    Eigen::Matrix<double, 2, 2> d_pix_d_norm;
    d_pix_d_norm << fx * (s + 2.0 * xn * xn * ds_dr2), fx * 2.0 * xn * yn * ds_dr2,
                    fy * 2.0 * xn * yn * ds_dr2, fy * (s + 2.0 * yn * yn * ds_dr2);
    Eigen::Matrix<double, 2, 3> d_norm_d_pc;
    d_norm_d_pc << iz, 0.0, -xn * iz,
                   0.0, iz, -yn * iz;
    const Eigen::Matrix<double, 2, 3> d_pix_d_pc = d_pix_d_norm * d_norm_d_pc;
    const Eigen::Matrix<double, 2, 3> d_rot = d_pix_d_pc * rotate_point_jacobian(rvec, c.point);
    jacobian->block<2, 3>(2 * i, 6) = -d_rot;
    jacobian->block<2, 3>(2 * i, 9) = -d_pix_d_pc;
  }
  return true;
}

void throw_if_failed(const LMSummary& summary, std::string_view who) {
  if (summary.converged()) return;
  std::ostringstream msg;
  msg << who << ": " << to_string(summary.status) << " after " << summary.iterations
      << " iterations (cost " << summary.initial_cost << " -> " << summary.final_cost
      << ", |g| " << summary.final_gradient_norm << ")";
  if (summary.status == LMStatus::kNoValidStep) throw DivergedBehindCamera(msg.str());
  throw NotConverged(msg.str(), summary);
}

namespace {

double observation_floor(std::span<const Correspondence> obs) {
  double scale = 1.0;
  for (const auto& c : obs) scale = std::max({scale, std::abs(c.pixel.u), std::abs(c.pixel.v)});
  return 64.0 * std::numeric_limits<double>::epsilon() * scale;
}

}  // namespace

RefinedCalibration refine_camera(const CameraParameters& init, std::span<const Correspondence> obs,
                                 const RobustCost& cost, const LMSettings& settings) {
  if (obs.size() < 8) {
    std::ostringstream msg;
    msg << "refine_camera: need at least 8 correspondences, got " << obs.size();
    throw InsufficientPoints(msg.str());
  }
  for (const auto& c : obs) {
    if (!(init.pose.apply(c.point).z() > 0.0))
      throw BehindCamera("refine_camera: initial pose puts point " + std::to_string(c.id) +
                         " behind the camera");
  }

  LMProblem problem;
  problem.block_size = 2;
  problem.residual_floor = observation_floor(obs);
  problem.evaluate = [obs](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
    return camera_residuals(x, obs, r, J);
  };

  Eigen::VectorXd x = pack_camera(init);
  const LMSummary summary = levenberg_marquardt(problem, cost, settings, x);
  throw_if_failed(summary, "refine_camera");

  const CameraParameters final_params = unpack_camera(x);
  ReprojectionStats stats = reprojection_stats(final_params, obs);

  RefinedCalibration out;
  out.intrinsics = final_params.intrinsics;
  out.distortion = final_params.distortion;
  out.pose = final_params.pose;
  out.rms_reprojection_px = stats.rms_px;
  out.max_reprojection_px = stats.max_px;
  out.per_point_residuals = std::move(stats.per_point);
  out.summary = summary;
  return out;
}

}  // namespace collcal
