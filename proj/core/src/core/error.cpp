#include "pointflow/core/error.hpp"

namespace pointflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyIndex: return "EmptyIndex";
    case ErrorCode::kDegenerateCorrespondences: return "DegenerateCorrespondences";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kNoCorrespondences: return "NoCorrespondences";
    case ErrorCode::kEmptyGrid: return "EmptyGrid";
    case ErrorCode::kSingleClassData: return "SingleClassData";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kMalformedFile: return "MalformedFile";
    case ErrorCode::kTruncatedRecord: return "TruncatedRecord";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

StageError::StageError(std::string stage, const Error& cause)
    : Error(cause.code(), "[" + stage + "] " + cause.what()), stage_(std::move(stage)) {}

}  // namespace pointflow
