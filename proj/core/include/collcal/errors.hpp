#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace collcal {

// Every failure the library raises carries one of these codes. The numeric
// value doubles as the process exit code of the command-line tool.
enum class ErrorCode : int {
  kUsage = 2,
  kConfigInvalid = 3,
  kDatasetInvalid = 4,
  kMatchError = 5,
  kInsufficientPoints = 6,
  kDegenerateConfiguration = 7,
  kNonConvergence = 8,
  kGeometry = 9,  // behind camera, outside frame, not a rotation, gimbal lock
  kIo = 10,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] int exit_code() const noexcept { return static_cast<int>(code_); }

 private:
  ErrorCode code_;
};

#define COLLCAL_DEFINE_ERROR(Name, Code)                              \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(Code, what) {}     \
  }

COLLCAL_DEFINE_ERROR(ConfigInvalid, ErrorCode::kConfigInvalid);
COLLCAL_DEFINE_ERROR(DatasetInvalid, ErrorCode::kDatasetInvalid);
COLLCAL_DEFINE_ERROR(MatchError, ErrorCode::kMatchError);
COLLCAL_DEFINE_ERROR(InsufficientPoints, ErrorCode::kInsufficientPoints);
COLLCAL_DEFINE_ERROR(DegenerateConfiguration, ErrorCode::kDegenerateConfiguration);
COLLCAL_DEFINE_ERROR(NonConvergence, ErrorCode::kNonConvergence);
COLLCAL_DEFINE_ERROR(IoError, ErrorCode::kIo);

// Geometry family: all map to the same exit code but stay distinguishable in C++.
COLLCAL_DEFINE_ERROR(GeometryError, ErrorCode::kGeometry);
class BehindCamera : public GeometryError {
 public:
  using GeometryError::GeometryError;
};
class PointOutsideFrame : public GeometryError {
 public:
  using GeometryError::GeometryError;
};
class NotARotation : public GeometryError {
 public:
  using GeometryError::GeometryError;
};
class GimbalLock : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

// Input-shape errors that are not about geometry.
class DuplicateId : public DatasetInvalid {
 public:
  using DatasetInvalid::DatasetInvalid;
};
class EmptyInput : public InsufficientPoints {
 public:
  using InsufficientPoints::InsufficientPoints;
};
class RankDeficient : public DegenerateConfiguration {
 public:
  using DegenerateConfiguration::DegenerateConfiguration;
};
class InvalidMatrix : public DegenerateConfiguration {
 public:
  using DegenerateConfiguration::DegenerateConfiguration;
};

#undef COLLCAL_DEFINE_ERROR

}  // namespace collcal
