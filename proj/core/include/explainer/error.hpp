#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace explainer {

enum class ErrorCode {
  // log_model
  kMalformedLine,
  kEmptyMessage,
  kUnknownLevel,
  // ingest
  kSessionClosed,
  kEmbedderFailure,
  // embedder
  kEmptyText,
  kRemoteUnavailable,
  kDimensionMismatch,
  kInvalidConfig,
  // vector_store
  kDuplicateId,
  kEmptyStore,
  kMalformedStore,
  // context_prompt
  kEmptyContext,
  kEmptyQuestion,
  kTemplateNotFound,
  kInvalidTemplate,
  // llm_backend
  kBackendUnavailable,
  kContextOverflow,
  kTimeout,
  // engine / io
  kInvalidArgument,
  kIo,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above, so
/// callers can branch on `code()` instead of parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace explainer
