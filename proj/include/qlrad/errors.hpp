#ifndef QLRAD_ERRORS_HPP
#define QLRAD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qlrad {

// Failure conditions surfaced by the library. Config-class codes mean the
// input violated a precondition; solver-class codes mean a run failed.
enum class ErrorCode {
  DomainViolation,
  DeltaZero,
  NearDegenerate,
  DegenerateAlpha,
  NonPositiveState,
  StepUnderflow,
  MonitorViolation,
  InsufficientSamples,
  QuadratureBreakdown,
  NoConvergence,
  DeltaNotPositive,
  RegimeMismatch,
  NoSolutionRegime,
  Overflow,
  IoError,
};

const char* error_code_name(ErrorCode c);

// Config-class errors map to CLI exit code 2, solver-class to 3.
bool is_config_error(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qlrad

#endif  // QLRAD_ERRORS_HPP
