#include "collcal/attitude.hpp"

#include "collcal/bundle_adjust.hpp"
#include "collcal/errors.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace collcal {
namespace {

Mat3 similarity_normalizer(std::span<const Vec2> pts) {
  Vec2 c = Vec2::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  double d = 0.0;
  for (const auto& p : pts) d += (p - c).norm();
  d /= static_cast<double>(pts.size());
  const double s = d > 0.0 ? std::sqrt(2.0) / d : 1.0;
  Mat3 T;
  T << s, 0.0, -s * c.x(),
       0.0, s, -s * c.y(),
       0.0, 0.0, 1.0;
  return T;
}

}  // namespace

Homography estimate_homography(std::span<const PlanarCorrespondence> pts, const CameraIntrinsics& K,
                               const DistortionCoefficients& d) {
  if (pts.size() < 4) {
    std::ostringstream msg;
    msg << "estimate_homography: need at least 4 points, got " << pts.size();
    throw InsufficientPoints(msg.str());
  }
  std::vector<Vec2> pix;
  std::vector<Vec2> tgt;
  pix.reserve(pts.size());
  tgt.reserve(pts.size());
  for (const auto& p : pts) {
    pix.push_back(undistort(p.pixel, K, d).vec());
    tgt.push_back(p.target);
  }
  const Mat3 Tp = similarity_normalizer(pix);
  const Mat3 Tt = similarity_normalizer(tgt);

  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const Vec3 X = Tt * tgt[k].homogeneous();
    const Vec3 x = Tp * pix[k].homogeneous();
    A.row(2 * i) << X.transpose(), 0.0, 0.0, 0.0, -x.x() * X.transpose();
    A.row(2 * i + 1) << 0.0, 0.0, 0.0, X.transpose(), -x.y() * X.transpose();
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(7) > 1e-10 * sv(0)))
    throw DegenerateConfiguration("estimate_homography: target points are (nearly) collinear");

  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Mat3 Hn;
  Hn << h(0), h(1), h(2),
        h(3), h(4), h(5),
        h(6), h(7), h(8);
  Homography H{Tp.inverse() * Hn * Tt};
  H.h /= H.h.norm();
  if (H.h(2, 2) < 0.0) H.h = -H.h;
  return H;
}

PlanarPose decompose_homography(const Homography& H, const CameraIntrinsics& K, const Vec2& centroid) {
  const Mat3 A = K.inverse_matrix() * H.h;
  const double n1 = A.col(0).norm();
  const double n2 = A.col(1).norm();
  if (!(n1 > 0.0) || !(n2 > 0.0)) throw DegenerateConfiguration("decompose_homography: singular H");

  Vec3 r1 = A.col(0) / n1;
  Vec3 r2 = A.col(1) / n2;
  Vec3 t = A.col(2) / n1;
  double depth = (centroid.x() * r1 + centroid.y() * r2 + t).z();
  if (depth < 0.0) {
    r1 = -r1;
    r2 = -r2;
    t = -t;
    depth = -depth;
  }
  if (!(depth > 0.0))
    throw BehindCamera("decompose_homography: target centroid has zero depth for both signs");

  Mat3 R;
  R.col(0) = r1;
  R.col(1) = r2;
  R.col(2) = r1.cross(r2);
  return {nearest_rotation(R), t};
}

AttitudeResult refine_pose(const CameraIntrinsics& K, const DistortionCoefficients& d,
                           const PlanarPose& init, std::span<const PlanarCorrespondence> pts,
                           const LMSettings& settings) {
  if (pts.size() < 4) throw InsufficientPoints("refine_pose: need at least 4 points");

  std::vector<Correspondence> obs;
  obs.reserve(pts.size());
  double scale = 1.0;
  for (const auto& p : pts) {
    obs.push_back({p.id, p.pixel, Point3(p.target.x(), p.target.y(), 0.0)});
    scale = std::max({scale, std::abs(p.pixel.u), std::abs(p.pixel.v)});
  }
  for (const auto& c : obs) {
    if (!((init.rotation * c.point + init.translation).z() > 0.0))
      throw BehindCamera("refine_pose: initial pose puts target point " + std::to_string(c.id) +
                         " behind the camera");
  }

  Eigen::VectorXd full = pack_camera({K, d, {init.rotation, init.translation}});
  LMProblem problem;
  problem.block_size = 2;
  problem.residual_floor = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  problem.evaluate = [&obs, full](const Eigen::VectorXd& x, Eigen::VectorXd& r,
                                  Eigen::MatrixXd* J) mutable {
    full.tail<6>() = x;
    Eigen::MatrixXd Jfull;
    if (!camera_residuals(full, obs, r, J ? &Jfull : nullptr)) return false;
    if (J) *J = Jfull.rightCols<6>();
    return true;
  };

  Eigen::VectorXd x = full.tail<6>();
  const LMSummary summary = levenberg_marquardt(problem, RobustCost::squared(), settings, x);
  throw_if_failed(summary, "refine_pose");

  AttitudeResult out;
  out.R_t = axis_angle_to_matrix(x.head<3>());
  out.t_t = x.tail<3>();
  out.R_r = out.R_t;
  out.euler = matrix_to_euler_xyz(out.R_r);
  const ReprojectionStats stats = reprojection_stats({K, d, {out.R_t, out.t_t}}, obs);
  out.rms_px = stats.rms_px;
  out.max_px = stats.max_px;
  out.summary = summary;
  return out;
}

AttitudeResult calibrate_attitude(std::span<const PlanarCorrespondence> pts, const CameraIntrinsics& K,
                                  const DistortionCoefficients& d, const LMSettings& settings) {
  const Homography H = estimate_homography(pts, K, d);
  Vec2 centroid = Vec2::Zero();
  for (const auto& p : pts) centroid += p.target;
  centroid /= static_cast<double>(pts.size());
  return refine_pose(K, d, decompose_homography(H, K, centroid), pts, settings);
}

Direction direction_of(const Vec3& v) {
  return {rad_to_deg(std::atan2(v.x(), v.z())),
          rad_to_deg(std::atan2(-v.y(), std::hypot(v.x(), v.z())))};
}

Direction target_direction(const CameraIntrinsics& K, const DistortionCoefficients& d,
                           const RotationMatrix& R_r, const PixelPoint& pixel) {
  const NormalizedPoint ray = pixel_to_ray(undistort(pixel, K, d), K);
  return direction_of(R_r.transpose() * ray.ray());
}

}  // namespace collcal
