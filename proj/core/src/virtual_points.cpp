#include "collcal/virtual_points.hpp"

#include "collcal/errors.hpp"
#include "collcal/rng.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

namespace collcal {

void DepthRange::validate() const {
  if (!(min_m > 0.0) || !(max_m > min_m) || !std::isfinite(max_m))
    throw ConfigInvalid("depth range: require 0 < min_m < max_m");
}

std::vector<VirtualControlPoint> generate_virtual_points(
    const ReferenceCamera& ref_cam, std::span<const FeatureObservation> observations,
    const DepthRange& range, std::uint64_t seed) {
  if (observations.empty()) throw EmptyInput("generate_virtual_points: no observations");
  ref_cam.intrinsics.validate();
  range.validate();

  std::unordered_set<FeatureId> seen;
  for (const auto& obs : observations) {
    if (!seen.insert(obs.id).second)
      throw DuplicateId("generate_virtual_points: duplicate feature id " + std::to_string(obs.id));
  }

  Rng rng(seed);
  std::vector<VirtualControlPoint> points;
  points.reserve(observations.size());
  for (const auto& obs : observations) {
    const PixelPoint ideal = undistort(obs.pixel, ref_cam.intrinsics, ref_cam.distortion);
    const NormalizedPoint ray = pixel_to_ray(ideal, ref_cam.intrinsics);
    const double depth = rng.uniform(range.min_m, range.max_m);
    points.push_back({obs.id, depth * ray.ray(), obs.pixel});
  }
  return points;
}

}  // namespace collcal
