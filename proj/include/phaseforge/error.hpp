#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phaseforge {

enum class ErrorCode {
  OutOfRange,
  InvalidModel,
  NoIntersection,
  AmbiguousIntersection,
  NotOnSurface,
  NonMonotoneHits,
  TargetUnreachable,
  EmptyInput,
  NonPositiveFootprint,
  EvanescentDeflection,
  NonMonotoneLut,
  DeflectionBudgetExceeded,
  PhaseRangeExceeded,
  ConfigError,
  FileFormat,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::NoIntersection: return "NoIntersection";
    case ErrorCode::AmbiguousIntersection: return "AmbiguousIntersection";
    case ErrorCode::NotOnSurface: return "NotOnSurface";
    case ErrorCode::NonMonotoneHits: return "NonMonotoneHits";
    case ErrorCode::TargetUnreachable: return "TargetUnreachable";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NonPositiveFootprint: return "NonPositiveFootprint";
    case ErrorCode::EvanescentDeflection: return "EvanescentDeflection";
    case ErrorCode::NonMonotoneLut: return "NonMonotoneLut";
    case ErrorCode::DeflectionBudgetExceeded: return "DeflectionBudgetExceeded";
    case ErrorCode::PhaseRangeExceeded: return "PhaseRangeExceeded";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::FileFormat: return "FileFormat";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Library-wide exception. `what()` is "<Code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Same error with a context prefix on the detail (e.g. the pipeline stage).
  Error annotated(std::string_view context) const {
    return Error(code_, std::string(context) + ": " + detail_);
  }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace phaseforge
