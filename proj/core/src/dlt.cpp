#include "collcal/dlt.hpp"

#include "collcal/errors.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace collcal {
namespace {

using Mat34 = Eigen::Matrix<double, 3, 4>;
using Mat4 = Eigen::Matrix4d;

constexpr double kDegenerateRatio = 1e-10;

// Similarity transforms that move the centroid to the origin and set the mean
// distance to sqrt(2) (pixels) or sqrt(3) (points).
struct Preconditioner {
  Mat3 pixel{Mat3::Identity()};
  Mat4 point{Mat4::Identity()};
};

Preconditioner make_preconditioner(std::span<const Correspondence> pts) {
  const auto n = static_cast<double>(pts.size());
  Vec2 c2 = Vec2::Zero();
  Vec3 c3 = Vec3::Zero();
  for (const auto& p : pts) {
    c2 += p.pixel.vec();
    c3 += p.point;
  }
  c2 /= n;
  c3 /= n;
  double d2 = 0.0;
  double d3 = 0.0;
  for (const auto& p : pts) {
    d2 += (p.pixel.vec() - c2).norm();
    d3 += (p.point - c3).norm();
  }
  d2 /= n;
  d3 /= n;
  const double s2 = d2 > 0.0 ? std::sqrt(2.0) / d2 : 1.0;
  const double s3 = d3 > 0.0 ? std::sqrt(3.0) / d3 : 1.0;

  Preconditioner T;
  T.pixel << s2, 0.0, -s2 * c2.x(),
             0.0, s2, -s2 * c2.y(),
             0.0, 0.0, 1.0;
  T.point.setIdentity();
  T.point.topLeftCorner<3, 3>() *= s3;
  T.point.topRightCorner<3, 1>() = -s3 * c3;
  return T;
}

struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

LinearSystem build_system(std::span<const Correspondence> pts, const Preconditioner& T) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  LinearSystem sys{Eigen::MatrixXd::Zero(2 * n, 11), Eigen::VectorXd::Zero(2 * n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = pts[static_cast<std::size_t>(i)];
    const Vec3 px = T.pixel * Vec3(c.pixel.u, c.pixel.v, 1.0);
    const Eigen::Vector4d X = T.point * c.point.homogeneous();
    const double u = px.x();
    const double v = px.y();
    auto ru = sys.A.row(2 * i);
    auto rv = sys.A.row(2 * i + 1);
    ru.segment<3>(0) = X.head<3>();
    ru(3) = 1.0;
    ru.segment<3>(8) = -u * X.head<3>();
    rv.segment<3>(4) = X.head<3>();
    rv(7) = 1.0;
    rv.segment<3>(8) = -v * X.head<3>();
    sys.b(2 * i) = u;
    sys.b(2 * i + 1) = v;
  }
  return sys;
}

Mat34 unpack(const Eigen::VectorXd& s) {
  Mat34 M;
  M << s(0), s(1), s(2), s(3),
       s(4), s(5), s(6), s(7),
       s(8), s(9), s(10), 1.0;
  return M;
}

}  // namespace

std::vector<Correspondence> pair_by_id(std::span<const VirtualControlPoint> points,
                                       std::span<const FeatureObservation> pixels) {
  std::map<FeatureId, const FeatureObservation*> by_id;
  for (const auto& obs : pixels) {
    if (!by_id.emplace(obs.id, &obs).second)
      throw DuplicateId("pair_by_id: duplicate observation id " + std::to_string(obs.id));
  }
  std::vector<Correspondence> out;
  out.reserve(points.size());
  std::vector<FeatureId> missing;
  for (const auto& vp : points) {
    const auto it = by_id.find(vp.id);
    if (it == by_id.end()) {
      missing.push_back(vp.id);
      continue;
    }
    out.push_back({vp.id, it->second->pixel, vp.position});
    by_id.erase(it);
  }
  if (!missing.empty() || !by_id.empty()) {
    std::ostringstream msg;
    msg << "feature ids do not match between reference and test observations;";
    if (!missing.empty()) {
      msg << " only in reference:";
      for (const auto id : missing) msg << ' ' << id;
    }
    if (!by_id.empty()) {
      msg << (missing.empty() ? "" : ";") << " only in test:";
      for (const auto& [id, _] : by_id) msg << ' ' << id;
    }
    throw MatchError(msg.str());
  }
  return out;
}

ProjectionMatrix compose_projection(const CameraIntrinsics& K, const PoseRT& pose) {
  ProjectionMatrix P;
  P.m.leftCols<3>() = K.matrix() * pose.rotation;
  P.m.col(3) = K.matrix() * pose.translation;
  return P;
}

ProjectionMatrix normalize_projection(const ProjectionMatrix& M) {
  const double scale = M.m.block<1, 3>(2, 0).norm();
  if (!(scale > 0.0)) throw InvalidMatrix("projection matrix has a zero third row");
  ProjectionMatrix out{M.m / scale};
  if (out.m.leftCols<3>().determinant() < 0.0) out.m = -out.m;
  return out;
}

ProjectionMatrix solve_projection_matrix(std::span<const Correspondence> core) {
  if (core.size() < 6) {
    std::ostringstream msg;
    msg << "solve_projection_matrix: need at least 6 correspondences, got " << core.size();
    throw InsufficientPoints(msg.str());
  }

  const Preconditioner T = make_preconditioner(core);
  const LinearSystem sys = build_system(core, T);

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > kDegenerateRatio * sv(0))) {
    std::ostringstream msg;
    msg << "solve_projection_matrix: design matrix is rank deficient (sigma_min/sigma_max = "
        << sv(sv.size() - 1) / sv(0) << "); points may be coplanar";
    throw DegenerateConfiguration(msg.str());
  }
  const Eigen::VectorXd s = svd.solve(sys.b);

  ProjectionMatrix M;
  M.m = T.pixel.inverse() * unpack(s) * T.point;
  return normalize_projection(M);
}

double dlt_system_residual(const ProjectionMatrix& M, std::span<const Correspondence> core) {
  if (core.empty()) return 0.0;
  const Preconditioner T = make_preconditioner(core);
  const LinearSystem sys = build_system(core, T);
  Mat34 Mn = T.pixel * M.m * T.point.inverse();
  Mn /= Mn(2, 3);
  Eigen::VectorXd s(11);
  s << Mn(0, 0), Mn(0, 1), Mn(0, 2), Mn(0, 3), Mn(1, 0), Mn(1, 1), Mn(1, 2), Mn(1, 3), Mn(2, 0),
      Mn(2, 1), Mn(2, 2);
  return std::sqrt((sys.A * s - sys.b).squaredNorm() / static_cast<double>(sys.b.size()));
}

InitialCalibration decompose_projection(const ProjectionMatrix& input) {
  const ProjectionMatrix M = normalize_projection(input);
  const Vec3 m1 = M.m.block<1, 3>(0, 0).transpose();
  const Vec3 m2 = M.m.block<1, 3>(1, 0).transpose();
  const Vec3 m3 = M.m.block<1, 3>(2, 0).transpose();

  InitialCalibration out;
  auto& K = out.intrinsics;
  K.u0 = m1.dot(m3);
  K.v0 = m2.dot(m3);
  K.fx = m1.cross(m3).norm();
  K.fy = m2.cross(m3).norm();
  if (!(K.fx > 0.0) || !(K.fy > 0.0))
    throw InvalidMatrix("decompose_projection: non-positive focal length");

  Mat3 rows;
  rows.row(0) = ((m1 - K.u0 * m3) / K.fx).transpose();
  rows.row(1) = ((m2 - K.v0 * m3) / K.fy).transpose();
  rows.row(2) = m3.transpose();
  out.pose.rotation = nearest_rotation(rows);

  const double tz = M.m(2, 3);
  out.pose.translation = Vec3((M.m(0, 3) - K.u0 * tz) / K.fx, (M.m(1, 3) - K.v0 * tz) / K.fy, tz);
  return out;
}

DistortionCoefficients estimate_initial_distortion(std::span<const Correspondence> all,
                                                   const InitialCalibration& calib) {
  if (all.size() < 2) throw RankDeficient("estimate_initial_distortion: need at least two points");
  const auto n = static_cast<Eigen::Index>(all.size());
  Eigen::MatrixXd A(2 * n, 2);
  Eigen::VectorXd b(2 * n);
  const auto& K = calib.intrinsics;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = all[static_cast<std::size_t>(i)];
    const PixelPoint ideal = project(c.point, calib.pose, K, DistortionCoefficients{});
    const double du = ideal.u - K.u0;
    const double dv = ideal.v - K.v0;
    const double x = du / K.fx;
    const double y = dv / K.fy;
    const double r2 = x * x + y * y;
    A.row(2 * i) << du * r2, du * r2 * r2;
    A.row(2 * i + 1) << dv * r2, dv * r2 * r2;
    b(2 * i) = c.pixel.u - ideal.u;
    b(2 * i + 1) = c.pixel.v - ideal.v;
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv(1) > kDegenerateRatio * sv(0)))
    throw RankDeficient("estimate_initial_distortion: radii do not separate k1 and k2");
  const Eigen::Vector2d k = svd.solve(b);
  return {k(0), k(1)};
}

double FrameSize::half_diagonal() const {
  return 0.5 * std::hypot(static_cast<double>(width), static_cast<double>(height));
}

bool FrameSize::contains(const PixelPoint& p) const {
  return p.u >= 0.0 && p.v >= 0.0 && p.u <= width && p.v <= height;
}

RegionSplit split_by_region(std::span<const Correspondence> all, const FrameSize& frame,
                            double central_fraction) {
  const PixelPoint c = frame.center();
  const double radius = central_fraction * frame.half_diagonal();
  RegionSplit split;
  for (const auto& corr : all) {
    const double r = std::hypot(corr.pixel.u - c.u, corr.pixel.v - c.v);
    (r <= radius ? split.central : split.edge).push_back(corr);
  }
  return split;
}

InitialCalibration calibrate_single_image(std::span<const Correspondence> central,
                                          std::span<const Correspondence> edge) {
  InitialCalibration calib = decompose_projection(solve_projection_matrix(central));
  std::vector<Correspondence> all(central.begin(), central.end());
  all.insert(all.end(), edge.begin(), edge.end());
  calib.distortion = estimate_initial_distortion(all, calib);
  return calib;
}

}  // namespace collcal
