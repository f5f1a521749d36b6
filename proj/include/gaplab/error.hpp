#pragma once

#include <stdexcept>
#include <string>

namespace gaplab {

enum class ErrorCode {
  DegenerateDomain,
  InvalidChord,
  JohnSolveFailed,
  EmptyCut,
  NotLogConcave,
  SolverFailed,
  DegenerateWeight,
  ResolutionError,
  PreconditionFailed,
  FitUnderdetermined,
  InvalidInput,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateDomain: return "DegenerateDomain";
    case ErrorCode::InvalidChord: return "InvalidChord";
    case ErrorCode::JohnSolveFailed: return "JohnSolveFailed";
    case ErrorCode::EmptyCut: return "EmptyCut";
    case ErrorCode::NotLogConcave: return "NotLogConcave";
    case ErrorCode::SolverFailed: return "SolverFailed";
    case ErrorCode::DegenerateWeight: return "DegenerateWeight";
    case ErrorCode::ResolutionError: return "ResolutionError";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::FitUnderdetermined: return "FitUnderdetermined";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// One type per code so call sites can catch precisely.
template <ErrorCode C>
class CodedError : public Error {
 public:
  explicit CodedError(const std::string& what) : Error(C, what) {}
};

using DegenerateDomain = CodedError<ErrorCode::DegenerateDomain>;
using InvalidChord = CodedError<ErrorCode::InvalidChord>;
using JohnSolveFailed = CodedError<ErrorCode::JohnSolveFailed>;
using EmptyCut = CodedError<ErrorCode::EmptyCut>;
using NotLogConcave = CodedError<ErrorCode::NotLogConcave>;
using SolverFailed = CodedError<ErrorCode::SolverFailed>;
using DegenerateWeight = CodedError<ErrorCode::DegenerateWeight>;
using ResolutionError = CodedError<ErrorCode::ResolutionError>;
using PreconditionFailed = CodedError<ErrorCode::PreconditionFailed>;
using FitUnderdetermined = CodedError<ErrorCode::FitUnderdetermined>;
using InvalidInput = CodedError<ErrorCode::InvalidInput>;

}  // namespace gaplab
