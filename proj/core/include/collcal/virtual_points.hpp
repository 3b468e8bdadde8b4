#pragma once

// 3-D control points synthesised from a calibrated reference camera looking
// into the collimator: each feature ray is scaled by a random depth.

#include "collcal/geometry.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace collcal {

using FeatureId = std::int64_t;

struct ReferenceCamera {
  CameraIntrinsics intrinsics;
  DistortionCoefficients distortion;
};

struct DepthRange {
  double min_m{100.0};
  double max_m{1000.0};

  void validate() const;
};

struct FeatureObservation {
  FeatureId id{0};
  PixelPoint pixel;
};

struct VirtualControlPoint {
  FeatureId id{0};
  Point3 position{Point3::Zero()};  // reference-camera frame
  PixelPoint source_pixel;
};

/// For each observation: undistort, back-project to [x y 1], draw a depth
/// uniformly in [min_m, max_m) and scale the ray so that Z equals that depth.
/// The depth stream is Rng(seed), consumed in input order.
/// Throws EmptyInput, DuplicateId, or ConfigInvalid for a bad range.
[[nodiscard]] std::vector<VirtualControlPoint> generate_virtual_points(
    const ReferenceCamera& ref_cam, std::span<const FeatureObservation> observations,
    const DepthRange& range, std::uint64_t seed);

}  // namespace collcal
