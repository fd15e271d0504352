#include "lilo/common.hpp"

namespace lilo {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegeneratePoint: return "DegeneratePoint";
    case ErrorCode::kRotationNearPi: return "RotationNearPi";
    case ErrorCode::kEmptyImage: return "EmptyImage";
    case ErrorCode::kImageTooSmall: return "ImageTooSmall";
    case ErrorCode::kOddWidth: return "OddWidth";
    case ErrorCode::kMalformedFrame: return "MalformedFrame";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kMalformedPoseLine: return "MalformedPoseLine";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kTrajectoryTooShort: return "TrajectoryTooShort";
    case ErrorCode::kInsufficientConstraints: return "InsufficientConstraints";
  }
  return "Unknown";
}

}  // namespace lilo
