#include "qlrad/errors.hpp"

namespace qlrad {

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::DeltaZero: return "DeltaZero";
    case ErrorCode::NearDegenerate: return "NearDegenerate";
    case ErrorCode::DegenerateAlpha: return "DegenerateAlpha";
    case ErrorCode::NonPositiveState: return "NonPositiveState";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::MonitorViolation: return "MonitorViolation";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::QuadratureBreakdown: return "QuadratureBreakdown";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DeltaNotPositive: return "DeltaNotPositive";
    case ErrorCode::RegimeMismatch: return "RegimeMismatch";
    case ErrorCode::NoSolutionRegime: return "NoSolutionRegime";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_config_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::DomainViolation:
    case ErrorCode::DeltaZero:
    case ErrorCode::NearDegenerate:
    case ErrorCode::DegenerateAlpha:
    case ErrorCode::DeltaNotPositive:
    case ErrorCode::RegimeMismatch:
    case ErrorCode::NoSolutionRegime:
    case ErrorCode::IoError:
      return true;
    default:
      return false;
  }
}

}  // namespace qlrad
