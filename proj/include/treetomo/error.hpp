#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace treetomo {

enum class ErrorCode {
  NotATree,
  UnknownVertex,
  InvalidParameter,
  NotTerminal,
  MissingRow,
  DegreeMismatch,
  InvalidKernel,
  InvalidQuery,
  TooLarge,
  NotInLambda,
  NotAChild,
  MissingKnownRow,
  ZeroDenominator,
  OutOfRange,
  RowSumViolation,
  NonTermination,
  InsufficientData,
  FormatError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotATree: return "NotATree";
    case ErrorCode::UnknownVertex: return "UnknownVertex";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::NotTerminal: return "NotTerminal";
    case ErrorCode::MissingRow: return "MissingRow";
    case ErrorCode::DegreeMismatch: return "DegreeMismatch";
    case ErrorCode::InvalidKernel: return "InvalidKernel";
    case ErrorCode::InvalidQuery: return "InvalidQuery";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NotInLambda: return "NotInLambda";
    case ErrorCode::NotAChild: return "NotAChild";
    case ErrorCode::MissingKnownRow: return "MissingKnownRow";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::RowSumViolation: return "RowSumViolation";
    case ErrorCode::NonTermination: return "NonTermination";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

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

}  // namespace treetomo
