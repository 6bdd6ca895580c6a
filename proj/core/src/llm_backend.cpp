#include "explainer/llm_backend.hpp"

#include <chrono>

#include "explainer/error.hpp"
#include "explainer/sha256.hpp"
#include "http_util.hpp"
#include "json.hpp"

namespace explainer {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string completions_url(const std::string& endpoint) {
  auto path = detail::split_url(endpoint).path;
  constexpr std::string_view kSuffix = "/completions";
  if (path.size() >= kSuffix.size() && path.compare(path.size() - kSuffix.size(), kSuffix.size(), kSuffix) == 0) {
    return endpoint;
  }
  return detail::join_path(endpoint, "/v1/completions");
}

}  // namespace

void SamplingParams::validate() const {
  if (!(top_p > 0.0 && top_p <= 1.0)) throw Error(ErrorCode::kInvalidConfig, "top_p must be in (0, 1]");
  if (!(temp >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "temp must be >= 0");
  if (n_prev < 0 || top_k < 0 || penalty_last_n < 0) {
    throw Error(ErrorCode::kInvalidConfig, "sampling integers must be >= 0");
  }
}

void BackendConfig::validate() const {
  if (n_ctx <= 0) throw Error(ErrorCode::kInvalidConfig, "n_ctx must be > 0");
  if (n_batch < 0 || n_threads < 0 || n_gpu_layers < 0 || max_tokens < 0) {
    throw Error(ErrorCode::kInvalidConfig, "backend integers must be >= 0");
  }
  if (kind == BackendKind::kHttp && endpoint_url.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "HTTP backend needs an endpoint_url");
  }
  if (!(timeout_s > 0)) throw Error(ErrorCode::kInvalidConfig, "backend timeout must be > 0");
  sampling.validate();
}

std::size_t utf8_length(std::string_view text) noexcept {
  std::size_t n = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::size_t estimate_tokens(std::string_view text) noexcept { return (utf8_length(text) + 3) / 4; }

void check_context_fits(const PromptBundle& prompt, const BackendConfig& config) {
  auto chars = utf8_length(prompt.prompt_text);
  if (chars > config.char_cap()) {
    throw Error(ErrorCode::kContextOverflow, "prompt has " + std::to_string(chars) + " characters, cap is " +
                                                 std::to_string(config.char_cap()) + " (4 * n_ctx)");
  }
}

MockBackend::MockBackend(BackendConfig config) : config_(std::move(config)) { config_.kind = BackendKind::kMock; }

std::string MockBackend::answer_for(const PromptBundle& prompt) {
  return "MOCK-ANSWER q=" + prompt.question + "\nctx=" + std::to_string(prompt.context.entries.size()) +
         " lines\n" + sha256_hex(prompt.prompt_text);
}

CompletionResult MockBackend::complete(const PromptBundle& prompt) {
  auto start = Clock::now();
  check_context_fits(prompt, config_);
  CompletionResult result;
  result.text = answer_for(prompt);
  result.token_estimate = estimate_tokens(prompt.prompt_text);
  result.latency_s = seconds_since(start);
  return result;
}

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
  config_.kind = BackendKind::kHttp;
  config_.validate();
}

std::string HttpBackend::request_body(const std::string& prompt_text, const BackendConfig& config) {
  nlohmann::ordered_json body;
  body["prompt"] = prompt_text;
  body["temperature"] = config.sampling.temp;
  body["top_p"] = config.sampling.top_p;
  body["top_k"] = config.sampling.top_k;
  body["max_tokens"] = config.max_tokens;
  // llama.cpp-style extensions; servers that do not know them ignore them.
  body["n_prev"] = config.sampling.n_prev;
  body["repeat_last_n"] = config.sampling.penalty_last_n;
  body["n_ctx"] = config.n_ctx;
  body["n_batch"] = config.n_batch;
  body["n_threads"] = config.n_threads;
  body["n_gpu_layers"] = config.n_gpu_layers;
  return body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

CompletionResult HttpBackend::complete(const PromptBundle& prompt) {
  check_context_fits(prompt, config_);
  std::lock_guard lock(mu_);
  auto start = Clock::now();
  auto url = completions_url(config_.endpoint_url);
  auto response = detail::post_json(url, request_body(prompt.prompt_text, config_), config_.timeout_s);
  if (response.failure == detail::HttpFailure::kTimeout) {
    throw Error(ErrorCode::kTimeout, "completion request timed out: " + response.error);
  }
  if (response.failure != detail::HttpFailure::kNone) {
    throw Error(ErrorCode::kBackendUnavailable, "completion request failed: " + response.error);
  }

  auto doc = nlohmann::json::parse(response.body, nullptr, false);
  std::string text;
  if (!doc.is_discarded() && doc.is_object()) {
    auto choices = doc.find("choices");
    if (choices != doc.end() && choices->is_array() && !choices->empty()) {
      const auto& first = (*choices)[0];
      if (first.contains("text") && first["text"].is_string()) {
        text = first["text"].get<std::string>();
      } else if (first.contains("message") && first["message"].is_object() &&
                 first["message"].value("content", nlohmann::json()).is_string()) {
        text = first["message"]["content"].get<std::string>();
      } else {
        throw Error(ErrorCode::kBackendUnavailable, "completion response has no text");
      }
    } else if (doc.contains("content") && doc["content"].is_string()) {
      text = doc["content"].get<std::string>();  // llama.cpp native /completion shape
    } else {
      throw Error(ErrorCode::kBackendUnavailable, "completion response has no choices");
    }
  } else {
    throw Error(ErrorCode::kBackendUnavailable, "completion response is not a JSON object");
  }

  CompletionResult result;
  result.text = std::move(text);
  result.token_estimate = estimate_tokens(prompt.prompt_text);
  result.latency_s = seconds_since(start);
  return result;
}

bool HttpBackend::health_check() {
  std::lock_guard lock(mu_);
  auto response = detail::get(config_.endpoint_url, config_.timeout_s);
  // Any HTTP answer, even 404, means the server is up and responsive.
  return response.failure == detail::HttpFailure::kNone || response.failure == detail::HttpFailure::kStatus;
}

std::unique_ptr<LlmBackend> make_backend(const BackendConfig& config) {
  config.validate();
  if (config.kind == BackendKind::kMock) return std::make_unique<MockBackend>(config);
  return std::make_unique<HttpBackend>(config);
}

}  // namespace explainer
