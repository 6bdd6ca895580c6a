#include "explainer/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "explainer/error.hpp"
#include "json.hpp"

namespace explainer {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::kInvalidConfig, "config: " + why); }

template <typename T>
void read(const json& obj, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  try {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) invalid(std::string("'") + key + "' must be a string");
      out = it->get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) invalid(std::string("'") + key + "' must be a number");
      out = it->get<T>();
    } else {
      if (!it->is_number_integer()) invalid(std::string("'") + key + "' must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (it->is_number_integer() && !it->is_number_unsigned()) {
          invalid(std::string("'") + key + "' must be non-negative");
        }
      }
      out = it->get<T>();
    }
  } catch (const json::exception& e) {
    invalid(std::string("'") + key + "': " + e.what());
  }
}

const json& section(const json& doc, const char* key, const json& empty) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return empty;
  if (!it->is_object()) invalid(std::string("'") + key + "' must be an object");
  return *it;
}

}  // namespace

void Config::validate() const {
  embedder.validate();
  backend.validate();
  try {
    retrieval.validate();
  } catch (const Error& e) {
    invalid(e.what());
  }
  if (template_id.empty()) invalid("template_id is empty");
}

Config parse_config(std::string_view json_text) {
  auto doc = json::parse(json_text.begin(), json_text.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) invalid("not a JSON object");
  const json empty = json::object();
  Config cfg;

  const auto& emb = section(doc, "embedder", empty);
  std::string kind = "reference";
  read(emb, "kind", kind);
  if (kind == "reference") {
    cfg.embedder.kind = EmbedderKind::kReference;
  } else if (kind == "remote") {
    cfg.embedder.kind = EmbedderKind::kRemote;
  } else {
    invalid("unknown embedder kind '" + kind + "'");
  }
  read(emb, "dim", cfg.embedder.dim);
  read(emb, "endpoint_url", cfg.embedder.endpoint_url);
  read(emb, "timeout_s", cfg.embedder.timeout_s);
  read(emb, "max_inflight", cfg.embedder.max_inflight);

  const auto& be = section(doc, "backend", empty);
  kind = "mock";
  read(be, "kind", kind);
  if (kind == "mock") {
    cfg.backend.kind = BackendKind::kMock;
  } else if (kind == "http") {
    cfg.backend.kind = BackendKind::kHttp;
  } else {
    invalid("unknown backend kind '" + kind + "'");
  }
  read(be, "endpoint_url", cfg.backend.endpoint_url);
  read(be, "n_ctx", cfg.backend.n_ctx);
  read(be, "n_batch", cfg.backend.n_batch);
  read(be, "n_threads", cfg.backend.n_threads);
  read(be, "n_gpu_layers", cfg.backend.n_gpu_layers);
  read(be, "max_tokens", cfg.backend.max_tokens);
  read(be, "timeout_s", cfg.backend.timeout_s);
  const auto& sp = section(be, "sampling", empty);
  read(sp, "n_prev", cfg.backend.sampling.n_prev);
  read(sp, "top_k", cfg.backend.sampling.top_k);
  read(sp, "top_p", cfg.backend.sampling.top_p);
  read(sp, "temp", cfg.backend.sampling.temp);
  read(sp, "penalty_last_n", cfg.backend.sampling.penalty_last_n);

  const auto& ret = section(doc, "retrieval", empty);
  read(ret, "k", cfg.retrieval.k);
  read(ret, "lambda", cfg.retrieval.lambda);

  read(doc, "template_id", cfg.template_id);
  read(doc, "template_dir", cfg.template_dir);

  cfg.validate();
  return cfg;
}

Config load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const Config& c) {
  nlohmann::ordered_json doc;
  doc["embedder"] = {
      {"kind", c.embedder.kind == EmbedderKind::kReference ? "reference" : "remote"},
      {"dim", c.embedder.dim},
      {"endpoint_url", c.embedder.endpoint_url},
      {"timeout_s", c.embedder.timeout_s},
      {"max_inflight", c.embedder.max_inflight},
  };
  nlohmann::ordered_json sampling = {
      {"n_prev", c.backend.sampling.n_prev}, {"top_k", c.backend.sampling.top_k},
      {"top_p", c.backend.sampling.top_p},   {"temp", c.backend.sampling.temp},
      {"penalty_last_n", c.backend.sampling.penalty_last_n},
  };
  doc["backend"] = {
      {"kind", c.backend.kind == BackendKind::kMock ? "mock" : "http"},
      {"endpoint_url", c.backend.endpoint_url},
      {"n_ctx", c.backend.n_ctx},
      {"n_batch", c.backend.n_batch},
      {"n_threads", c.backend.n_threads},
      {"n_gpu_layers", c.backend.n_gpu_layers},
      {"max_tokens", c.backend.max_tokens},
      {"timeout_s", c.backend.timeout_s},
      {"sampling", sampling},
  };
  doc["retrieval"] = {{"k", c.retrieval.k}, {"lambda", c.retrieval.lambda}};
  doc["template_id"] = c.template_id;
  doc["template_dir"] = c.template_dir;
  return doc.dump(2);
}

Config resolve_config(const std::optional<std::string>& explicit_path) {
  if (explicit_path) return load_config_file(*explicit_path);
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) return load_config_file(env);
  std::error_code ec;
  if (std::filesystem::exists(kDefaultConfigPath, ec)) return load_config_file(kDefaultConfigPath);
  return Config{};
}

}  // namespace explainer
