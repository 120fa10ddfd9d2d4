#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace robustfit {

enum class ErrorCode {
  ShapeMismatch,
  NonFinite,
  NotPositiveDefinite,
  SingularFactor,
  NoConvergence,
  InvalidConfig,
  EmptySpectrum,
  AllZeroWeights,
  EmptyInlierSet,
  InvalidSpec,
  ZeroTruth,
  TooShort,
  NoTrace,
  ParseError,
  NonMonotoneTimestamps,
  MissingColumn,
  InsufficientCoverage,
  ZeroActual,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::SingularFactor: return "SingularFactor";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptySpectrum: return "EmptySpectrum";
    case ErrorCode::AllZeroWeights: return "AllZeroWeights";
    case ErrorCode::EmptyInlierSet: return "EmptyInlierSet";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ZeroTruth: return "ZeroTruth";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::NoTrace: return "NoTrace";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonMonotoneTimestamps: return "NonMonotoneTimestamps";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::InsufficientCoverage: return "InsufficientCoverage";
    case ErrorCode::ZeroActual: return "ZeroActual";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace robustfit
