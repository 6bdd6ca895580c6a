#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <string>

#include "explainer/context_prompt.hpp"

namespace explainer {

/// Generation parameters forwarded to the model server.
struct SamplingParams {
  int n_prev = 64;
  int top_k = 40;
  double top_p = 0.95;
  double temp = 0.0;
  int penalty_last_n = 64;

  void validate() const;
};

enum class BackendKind { kMock, kHttp };

/// Runtime knobs for the model server. n_threads, n_batch and n_gpu_layers
/// are passed through, not enforced here; n_ctx also drives the local
/// overflow guard.
struct BackendConfig {
  BackendKind kind = BackendKind::kMock;
  std::string endpoint_url;  // server origin, e.g. http://127.0.0.1:8000
  int n_ctx = 4096;
  int n_batch = 256;
  int n_threads = 4;
  int n_gpu_layers = 33;
  int max_tokens = 512;
  SamplingParams sampling;
  double timeout_s = 120.0;

  void validate() const;
  /// Prompts longer than this many characters are rejected before sending.
  std::size_t char_cap() const noexcept { return static_cast<std::size_t>(n_ctx) * 4; }
};

struct CompletionResult {
  std::string text;
  double latency_s = 0.0;
  std::size_t token_estimate = 0;
};

/// Number of Unicode scalar values in UTF-8 `text` (invalid bytes count as one each).
std::size_t utf8_length(std::string_view text) noexcept;

/// ceil(characters / 4).
std::size_t estimate_tokens(std::string_view text) noexcept;

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;

  /// Throws kContextOverflow (before any I/O), kBackendUnavailable or kTimeout.
  virtual CompletionResult complete(const PromptBundle& prompt) = 0;
  virtual bool health_check() = 0;
  virtual const BackendConfig& config() const = 0;
};

/// Deterministic stand-in: answers with
///   MOCK-ANSWER q=<question>
///   ctx=<n> lines
///   <sha256 of prompt_text>
class MockBackend final : public LlmBackend {
 public:
  explicit MockBackend(BackendConfig config = {});

  CompletionResult complete(const PromptBundle& prompt) override;
  bool health_check() override { return true; }
  const BackendConfig& config() const override { return config_; }

  static std::string answer_for(const PromptBundle& prompt);

 private:
  BackendConfig config_;
};

/// OpenAI-compatible `/v1/completions` client. Calls are mutually exclusive.
class HttpBackend final : public LlmBackend {
 public:
  explicit HttpBackend(BackendConfig config);

  CompletionResult complete(const PromptBundle& prompt) override;
  bool health_check() override;
  const BackendConfig& config() const override { return config_; }

  /// Request body for `prompt_text` under `config` (exposed for tests).
  static std::string request_body(const std::string& prompt_text, const BackendConfig& config);

 private:
  BackendConfig config_;
  std::mutex mu_;
};

/// Raises kContextOverflow when the prompt exceeds config.char_cap().
void check_context_fits(const PromptBundle& prompt, const BackendConfig& config);

std::unique_ptr<LlmBackend> make_backend(const BackendConfig& config);

}  // namespace explainer
