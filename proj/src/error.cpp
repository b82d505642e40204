#include "blindspots/error.hpp"

#include <cstdio>

namespace blindspots {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroNorm: return "ZeroNorm";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::NotSymplectic: return "NotSymplectic";
    case ErrorCode::BadQuadrature: return "BadQuadrature";
    case ErrorCode::ImaginaryResidue: return "ImaginaryResidue";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::NonSymmetricWindow: return "NonSymmetricWindow";
    case ErrorCode::NoClosure: return "NoClosure";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::WrongArity: return "WrongArity";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::DegenerateSpots: return "DegenerateSpots";
    case ErrorCode::NegativeTime: return "NegativeTime";
    case ErrorCode::DissipativeUnsupported: return "DissipativeUnsupported";
    case ErrorCode::NeverLifted: return "NeverLifted";
    case ErrorCode::NoMinimum: return "NoMinimum";
    case ErrorCode::NeverPositive: return "NeverPositive";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ZeroNorm:
    case ErrorCode::NotSymplectic:
    case ErrorCode::WrongArity:
    case ErrorCode::NegativeTime:
    case ErrorCode::DissipativeUnsupported:
      return true;
    default:
      return false;
  }
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

}  // namespace blindspots
