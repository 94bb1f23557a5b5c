#pragma once

#include <stdexcept>
#include <string>

namespace thermo {

/// Machine-readable failure categories, mirrored one-to-one by the C API
/// status codes.
enum class ErrorCode {
  InvalidArgument,
  ParseError,
  NonConvergent,      // quadrature refinement exhausted
  PowerOutOfRange,    // requested power outside [0, P*)
  BracketFailure,     // no sign change found for the multiplier equation
  StepFailure,        // ODE step size underflow
  PositivityLoss,     // covariance left the positive-definite cone
  NoConvergence,      // periodic-orbit iteration exhausted
  NotPeriodic,        // trajectory endpoints do not close a cycle
  NotCarnotProfile,   // hot-bath heat undefined for this profile
  DegenerateProfile,  // Var(sqrt T) at quadrature noise level
  DegenerateCycle,    // zero-work cycle, efficiency undefined
  UnstableStep,       // Monte Carlo velocity overflow guard tripped
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace thermo
