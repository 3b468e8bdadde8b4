#pragma once

// Closed-form single-image calibration from 2-D/3-D correspondences:
// linear projection-matrix estimate, decomposition into intrinsics and pose
// using the orthonormality of the rotation rows, and a linear fit of the
// radial distortion from the residuals of points near the image border.

#include "collcal/geometry.hpp"
#include "collcal/virtual_points.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace collcal {

struct Correspondence {
  FeatureId id{0};
  PixelPoint pixel;  // observed (distorted)
  Point3 point{Point3::Zero()};
};

/// 3x4 camera matrix. solve_projection_matrix() returns it scaled so that
/// the third row's left block has unit norm and det(left 3x3) > 0.
struct ProjectionMatrix {
  Eigen::Matrix<double, 3, 4> m{Eigen::Matrix<double, 3, 4>::Zero()};

  /// Entry m_i in row-major order, i in [0, 12).
  [[nodiscard]] double operator[](int i) const { return m(i / 4, i % 4); }
};

using InitialCalibration = CameraParameters;

/// Joins control points and test-camera observations on feature id. Throws
/// MatchError listing ids present on only one side, DuplicateId on repeats.
[[nodiscard]] std::vector<Correspondence> pair_by_id(std::span<const VirtualControlPoint> points,
                                                     std::span<const FeatureObservation> pixels);

[[nodiscard]] ProjectionMatrix compose_projection(const CameraIntrinsics& K, const PoseRT& pose);

/// Applies the scale and sign normalisation described on ProjectionMatrix.
[[nodiscard]] ProjectionMatrix normalize_projection(const ProjectionMatrix& M);

/// Least-squares solve of the inhomogeneous 2n x 11 system (m_11 fixed to 1)
/// on centroid/scale-normalised points and pixels, followed by denormalisation
/// and scale recovery. Pixels are used as given: no distortion handling.
/// Throws InsufficientPoints (< 6) or DegenerateConfiguration when the
/// design matrix singular-value ratio is below 1e-10 (e.g. coplanar points).
[[nodiscard]] ProjectionMatrix solve_projection_matrix(std::span<const Correspondence> core);

/// RMS residual of the normalised linear system evaluated at M. This is the
/// quantity the linear solve minimises; ~1e-15 for exact data.
[[nodiscard]] double dlt_system_residual(const ProjectionMatrix& M,
                                         std::span<const Correspondence> core);

/// Principal point from row dot products, focal lengths from cross-product
/// norms, rotation rows and translation by back-substitution. The rotation is
/// projected to the nearest orthonormal matrix. Distortion is left at zero.
/// Throws InvalidMatrix if a focal length comes out non-positive.
[[nodiscard]] InitialCalibration decompose_projection(const ProjectionMatrix& M);

/// Linear least squares for (k1, k2): the pinhole projections of all points
/// under `calib` are compared with the observed pixels through the forward
/// distortion model. Throws RankDeficient if the radii do not separate k1 and k2.
[[nodiscard]] DistortionCoefficients estimate_initial_distortion(
    std::span<const Correspondence> all, const InitialCalibration& calib);

struct FrameSize {
  int width{0};
  int height{0};

  [[nodiscard]] PixelPoint center() const { return {0.5 * width, 0.5 * height}; }
  [[nodiscard]] double half_diagonal() const;
  [[nodiscard]] bool contains(const PixelPoint& p) const;
};

struct RegionSplit {
  std::vector<Correspondence> central;
  std::vector<Correspondence> edge;
};

/// Points within `central_fraction` of the half-diagonal from the frame
/// centre are central; the rest are edge points.
[[nodiscard]] RegionSplit split_by_region(std::span<const Correspondence> all, const FrameSize& frame,
                                          double central_fraction = 1.0 / 3.0);

/// DLT on the central points, decomposition, then distortion from all points.
[[nodiscard]] InitialCalibration calibrate_single_image(std::span<const Correspondence> central,
                                                        std::span<const Correspondence> edge);

}  // namespace collcal
