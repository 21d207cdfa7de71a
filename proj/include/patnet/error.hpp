#ifndef PATNET_ERROR_HPP
#define PATNET_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace patnet {

enum class ErrorCode {
  SchemaViolation,
  DuplicateTriple,
  UnknownEntity,
  EmptyStore,
  PoolTooSmall,
  InvalidConfig,
  ParseError,
  MalformedCode,
  UnknownOrdinal,
  NumericalDivergence,
  IoError,
  FingerprintMismatch,
  EmptyTestSet,
  ZeroVector,
  UnsupportedModel,
  EmptyHome,
  TargetInHome,
  TooFewTargets,
  EmptyPortfolio,
  UnknownGroup,
  EmptyProfile,
  InconsistentModelSets,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::DuplicateTriple: return "DuplicateTriple";
    case ErrorCode::UnknownEntity: return "UnknownEntity";
    case ErrorCode::EmptyStore: return "EmptyStore";
    case ErrorCode::PoolTooSmall: return "PoolTooSmall";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MalformedCode: return "MalformedCode";
    case ErrorCode::UnknownOrdinal: return "UnknownOrdinal";
    case ErrorCode::NumericalDivergence: return "NumericalDivergence";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FingerprintMismatch: return "FingerprintMismatch";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::UnsupportedModel: return "UnsupportedModel";
    case ErrorCode::EmptyHome: return "EmptyHome";
    case ErrorCode::TargetInHome: return "TargetInHome";
    case ErrorCode::TooFewTargets: return "TooFewTargets";
    case ErrorCode::EmptyPortfolio: return "EmptyPortfolio";
    case ErrorCode::UnknownGroup: return "UnknownGroup";
    case ErrorCode::EmptyProfile: return "EmptyProfile";
    case ErrorCode::InconsistentModelSets: return "InconsistentModelSets";
  }
  return "Unknown";
}

/// Every failure raised by the library. `what()` is "<Code>: <detail>" on a
/// single line so callers can forward it as a machine-parsable reason.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace patnet

#endif  // PATNET_ERROR_HPP
