#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blindspots {

enum class ErrorCode {
  InvalidArgument,
  ZeroNorm,
  NotNormalized,
  NotSymplectic,
  BadQuadrature,
  ImaginaryResidue,
  WindowTooSmall,
  NonSymmetricWindow,
  NoClosure,
  DegenerateGeometry,
  WrongArity,
  NoConvergence,
  SingularJacobian,
  DegenerateSpots,
  NegativeTime,
  DissipativeUnsupported,
  NeverLifted,
  NoMinimum,
  NeverPositive,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for errors caused by bad input data rather than by a numerical
/// condition met during evaluation.
bool is_validation_error(ErrorCode code) noexcept;

// Short %g rendering for messages.
std::string format_number(double x);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace blindspots
