#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace prefopt {

enum class ErrorCode {
  kInvalidInput,
  kPrecondition,
  kInstanceTooLarge,
  kTimeLimitExceeded,
  kEmptyInstance,
  kParseFailure,
  kLengthMismatch,
  kAllBackendsFailed,
  kUnknownSpotId,
  kUnknownCandidateId,
  kMissingBinding,
  kNotFound,
  kApiUnavailable,
  kBackendError,
  kStorageError,
};

// Stable machine-readable name, used in problem-detail bodies and CLI output.
std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace prefopt
