#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fails {

// Machine-readable error tokens. The same vocabulary is used for HTTP error
// bodies and CLI diagnostics.
enum class ErrorCode {
  kPrecondition,
  kUnknownProvider,
  kUnknownService,
  kUnknownGroup,
  kNetworkExhausted,
  kMalformedPage,
  kEmptyHistory,
  kUnparseableTimestamp,
  kIoError,
  kSchemaMismatch,
  kRowInvalid,
  kEmptySamples,
  kDegenerateSeries,
  kInsufficientData,
  kRenderFailure,
  kClientError,
  kClientAuth,
  kEmptyResponse,
};

std::string_view error_code_token(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view token() const { return error_code_token(code_); }

 private:
  ErrorCode code_;
};

}  // namespace fails
