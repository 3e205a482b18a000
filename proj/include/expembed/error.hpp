#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace expembed {

enum class ErrorCode {
  NonUnitMass,
  NonFiniteMean,
  EmptyMeasure,
  InvalidMeasure,
  TruncationUnnecessary,
  NoTangent,
  OutOfRange,
  DegenerateMeasure,
  UnboundedSide,
  InvalidRate,
  NotAtomic,
  TooFewStates,
  SingularSystem,
  StepCapExceeded,
  NoDensityAt,
  GridTooCoarse,
  UnboundedInterval,
  NonAtomicInterior,
  OutOfInterval,
  EmptySample,
  ArbitrageViolation,
  InvalidArgument,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can map it to an exit status.
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
    case ErrorCode::NonUnitMass: return "NonUnitMass";
    case ErrorCode::NonFiniteMean: return "NonFiniteMean";
    case ErrorCode::EmptyMeasure: return "EmptyMeasure";
    case ErrorCode::InvalidMeasure: return "InvalidMeasure";
    case ErrorCode::TruncationUnnecessary: return "TruncationUnnecessary";
    case ErrorCode::NoTangent: return "NoTangent";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DegenerateMeasure: return "DegenerateMeasure";
    case ErrorCode::UnboundedSide: return "UnboundedSide";
    case ErrorCode::InvalidRate: return "InvalidRate";
    case ErrorCode::NotAtomic: return "NotAtomic";
    case ErrorCode::TooFewStates: return "TooFewStates";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::StepCapExceeded: return "StepCapExceeded";
    case ErrorCode::NoDensityAt: return "NoDensityAt";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::UnboundedInterval: return "UnboundedInterval";
    case ErrorCode::NonAtomicInterior: return "NonAtomicInterior";
    case ErrorCode::OutOfInterval: return "OutOfInterval";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::ArbitrageViolation: return "ArbitrageViolation";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace expembed
