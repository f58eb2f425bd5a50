#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pointflow {

enum class ErrorCode {
  kInvalidArgument,
  kEmptyIndex,
  kDegenerateCorrespondences,
  kInsufficientSamples,
  kNoCorrespondences,
  kEmptyGrid,
  kSingleClassData,
  kTooFewPoints,
  kLengthMismatch,
  kMalformedFile,
  kTruncatedRecord,
  kInvalidConfig,
  kIoError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-checkable error kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// An Error raised inside a named pipeline stage ("ego", "classify", ...).
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause);

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace pointflow
