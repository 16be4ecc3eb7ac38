#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qldp {

enum class ErrorCode {
  InvalidSpec,
  InvalidConfig,
  OutOfHorizon,
  DimensionMismatch,
  TooLarge,
  OffLattice,
  MemoryCap,
  AllMinusInfinity,
  NotPeriodic,
  Diverged,
  BracketFailure,
  NonConvexCurve,
  InvalidCurve,
  InvalidRho,
  CapExceeded,
  TooManyStates,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a typed failure kind. Every fallible operation in the
/// library throws this; the CLI maps the kind onto its exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::OutOfHorizon: return "OutOfHorizon";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::OffLattice: return "OffLattice";
    case ErrorCode::MemoryCap: return "MemoryCap";
    case ErrorCode::AllMinusInfinity: return "AllMinusInfinity";
    case ErrorCode::NotPeriodic: return "NotPeriodic";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::NonConvexCurve: return "NonConvexCurve";
    case ErrorCode::InvalidCurve: return "InvalidCurve";
    case ErrorCode::InvalidRho: return "InvalidRho";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::TooManyStates: return "TooManyStates";
  }
  return "Unknown";
}

}  // namespace qldp
