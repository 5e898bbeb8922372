#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pairprox {

enum class ErrorCode {
  DimensionMismatch,
  NonSquare,
  SingularMatrix,
  NotSymmetric,
  NoConvergence,
  UnknownRegistryKey,
  InvalidArgument,
  NonPositiveSlope,
  UnsupportedStructure,
  NotInRange,
  NonFiniteIterate,
  TraceDisabled,
  AllEigenvaluesZero,
  ParseError,
  UnknownDemo,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::UnknownRegistryKey: return "UnknownRegistryKey";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveSlope: return "NonPositiveSlope";
    case ErrorCode::UnsupportedStructure: return "UnsupportedStructure";
    case ErrorCode::NotInRange: return "NotInRange";
    case ErrorCode::NonFiniteIterate: return "NonFiniteIterate";
    case ErrorCode::TraceDisabled: return "TraceDisabled";
    case ErrorCode::AllEigenvaluesZero: return "AllEigenvaluesZero";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownDemo: return "UnknownDemo";
  }
  return "Unknown";
}

// Every failure in the library surfaces as this exception; code() is the
// machine-checkable part, what() carries the human diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace pairprox
