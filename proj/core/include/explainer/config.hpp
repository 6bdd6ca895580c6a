#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "explainer/embedder.hpp"
#include "explainer/llm_backend.hpp"
#include "explainer/vector_store.hpp"

namespace explainer {

/// Everything an engine needs, as read from one JSON document:
///
///   {
///     "embedder":  {"kind": "reference", "dim": 256, "endpoint_url": "", "timeout_s": 10, "max_inflight": 1},
///     "backend":   {"kind": "mock", "endpoint_url": "", "n_ctx": 4096, "n_batch": 256, "n_threads": 4,
///                   "n_gpu_layers": 33, "max_tokens": 512, "timeout_s": 120,
///                   "sampling": {"n_prev": 64, "top_k": 40, "top_p": 0.95, "temp": 0.0, "penalty_last_n": 64}},
///     "retrieval": {"k": 20, "lambda": 0.5},
///     "template_id": "default",
///     "template_dir": ""
///   }
///
/// Every key is optional; missing keys keep the defaults above.
struct Config {
  EmbedderConfig embedder;
  BackendConfig backend;
  RetrievalParams retrieval;
  std::string template_id = "default";
  std::string template_dir;  // empty = built-in templates

  /// Validates each section; does not check that the template exists.
  void validate() const;
};

/// Throws kInvalidConfig on bad JSON, wrong types or invalid values.
Config parse_config(std::string_view json_text);
Config load_config_file(const std::string& path);
std::string config_to_json(const Config& config);

inline constexpr const char* kConfigEnvVar = "EXPLAINER_CONFIG";
inline constexpr const char* kDefaultConfigPath = "explainer.json";

/// Resolution order: explicit path, then $EXPLAINER_CONFIG, then
/// ./explainer.json if present, else built-in defaults. An explicitly named
/// file that does not exist is an error.
Config resolve_config(const std::optional<std::string>& explicit_path);

}  // namespace explainer
