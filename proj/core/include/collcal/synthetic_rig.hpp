#pragma once

// Ground-truth generator standing in for the collimator bench and the field
// flight. The reticle sits in the collimator's focal plane, so every camera
// on the bench sees it at infinity. This is modelled as a plane viewed from a
// single optical centre shared by the reference and test cameras: the test
// pose relative to the virtual control points is a pure rotation.

#include "collcal/attitude.hpp"
#include "collcal/dlt.hpp"
#include "collcal/geometry.hpp"
#include "collcal/virtual_points.hpp"

#include <cstdint>
#include <vector>

namespace collcal {

struct ReticleSpec {
  int rows{15};
  int cols{15};
  double pitch_m{0.011};

  void validate() const;
  [[nodiscard]] int size() const { return rows * cols; }
  /// Row-major ids; coordinates centred on the grid middle.
  [[nodiscard]] Vec2 position(FeatureId id) const;
};

struct SimCamera {
  CameraIntrinsics intrinsics;
  DistortionCoefficients distortion;
  FrameSize frame;
};

enum class OutOfFramePolicy { kError, kDrop };

struct RigScenario {
  SimCamera true_camera;
  PoseRT true_pose;  // reticle (target) frame -> test camera
  ReticleSpec reticle;
  double noise_sigma_px{0.0};
  std::uint64_t seed{0};
  OutOfFramePolicy out_of_frame{OutOfFramePolicy::kError};
  /// Rotation from the device reference frame to the target frame. Identity
  /// when the bench levelling is perfect.
  RotationMatrix reference_to_target{RotationMatrix::Identity()};

  void validate() const;
};

/// The reference camera on the same bench.
struct ReferenceScenario {
  SimCamera camera;
  RotationMatrix rotation{RotationMatrix::Identity()};  // target frame -> reference camera
  double noise_sigma_px{0.0};
  std::uint64_t seed{0};
};

/// Pose of a camera looking into a collimator of focal length `focal_m`:
/// the reticle plane is at that distance along the collimator axis.
[[nodiscard]] PoseRT collimator_pose(const RotationMatrix& rotation, double focal_m);

/// True camera-to-reference rotation of a scenario.
[[nodiscard]] RotationMatrix true_reference_rotation(const RigScenario& rig);

struct ReticleObservation {
  std::vector<PlanarCorrespondence> planar;
  std::vector<FeatureId> out_of_frame;  // ids dropped under kDrop
};

/// Projects every grid point through the true camera and adds i.i.d. Gaussian
/// noise drawn in id order. Throws BehindCamera / PointOutsideFrame.
[[nodiscard]] ReticleObservation simulate_reticle_observation(const RigScenario& rig);

struct CollimatorObservation {
  ReticleObservation test;
  std::vector<FeatureObservation> reference;
  /// Ground-truth pose of the test camera relative to the reference camera
  /// frame in which virtual control points live.
  PoseRT test_from_reference;
};

/// Test and reference camera views of the same reticle. Features outside
/// either frame follow the rig's policy; only features seen by both are kept.
[[nodiscard]] CollimatorObservation simulate_collimator_pair(const RigScenario& rig,
                                                             const ReferenceScenario& ref);

/// Virtual control points generated from the reference view, paired by id with
/// the test view.
[[nodiscard]] std::vector<Correspondence> virtual_control_correspondences(
    const CollimatorObservation& obs, const ReferenceCamera& ref_cam, const DepthRange& range,
    std::uint64_t seed);

struct TargetScenario {
  Point3 target_position_m{Point3::Zero()};  // local frame, device at origin
  RotationMatrix true_R_r{RotationMatrix::Identity()};  // reference -> camera
  RotationMatrix device_attitude{RotationMatrix::Identity()};  // local -> reference
};

struct FieldSample {
  Direction truth;
  PixelPoint observed_pixel;
};

/// Truth direction of the target in the reference frame and the pixel the
/// camera records (plus noise). Throws BehindCamera / PointOutsideFrame.
[[nodiscard]] FieldSample simulate_field_test(const RigScenario& rig, const TargetScenario& tgt);

/// Device attitudes for a flight pass: each frame points the device so the
/// target lands at a random location in the inner `fill` of the frame, with
/// a random roll of up to `roll_jitter_deg` about the line of sight.
[[nodiscard]] std::vector<TargetScenario> field_sequence(const RigScenario& rig,
                                                         const Point3& target_position_m,
                                                         int frames, double roll_jitter_deg,
                                                         double fill, std::uint64_t seed);

/// fx = fy = 1000 * focal_mm / pixel_um, principal point at the frame centre,
/// no distortion.
struct NominalCamera {
  CameraIntrinsics intrinsics;
  DistortionCoefficients distortion;
};
[[nodiscard]] NominalCamera build_nominal_intrinsics(double equiv_focal_mm, double pixel_size_um,
                                                     int width_px, int height_px);

/// Reticle pitch so the grid spans `fill` of the tighter normalised half-field
/// of both cameras, less `margin` (normalised units) for attitude offsets.
[[nodiscard]] double fit_reticle_pitch(const ReticleSpec& reticle, double collimator_focal_m,
                                       const SimCamera& a, const SimCamera& b, double fill,
                                       double margin);

/// Parameter span used for randomised closure scenarios.
struct ScenarioBounds {
  double focal_min_px{2600.0};
  double focal_max_px{7600.0};
  double k1_abs_max{0.7};
  double k2_abs_max{4.0};
  double aspect_jitter{0.003};
  double principal_jitter_px{20.0};
  double attitude_abs_max_deg{1.0};
  double collimator_focal_m{0.5};
  double noise_sigma_px{0.0};
};

struct SampledScenario {
  RigScenario rig;
  ReferenceScenario reference;
};

/// Random test camera within `bounds`, the reference camera fixed to a
/// 2448 x 2048 sensor. The test sensor is sized to a normalised half-field of
/// 0.24 x 0.19 so the distortion stays invertible across the frame.
[[nodiscard]] SampledScenario sample_scenario(const ScenarioBounds& bounds, std::uint64_t seed);

}  // namespace collcal
