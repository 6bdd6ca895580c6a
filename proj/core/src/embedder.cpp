#include "explainer/embedder.hpp"

#include <cmath>
#include <map>

#include "explainer/error.hpp"
#include "explainer/log_model.hpp"
#include "http_util.hpp"
#include "json.hpp"

namespace explainer {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

bool is_token_byte(unsigned char c) noexcept {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

void require_text(std::string_view text) {
  if (trim(text).empty()) throw Error(ErrorCode::kEmptyText, "cannot embed empty text");
}

}  // namespace

double l2_norm(std::span<const double> v) noexcept {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

EmbeddingVector normalized(std::vector<double> values) {
  for (double x : values) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kEmbedderFailure, "embedding has non-finite entry");
  }
  double norm = l2_norm(values);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::kEmbedderFailure, "embedding has zero norm");
  }
  for (double& x : values) x /= norm;
  return EmbeddingVector{std::move(values)};
}

void EmbedderConfig::validate() const {
  switch (kind) {
    case EmbedderKind::kReference:
      if (dim < 8) throw Error(ErrorCode::kInvalidConfig, "reference embedder dim must be >= 8");
      break;
    case EmbedderKind::kRemote:
      if (endpoint_url.empty()) {
        throw Error(ErrorCode::kInvalidConfig, "remote embedder needs an endpoint_url");
      }
      if (max_inflight == 0) throw Error(ErrorCode::kInvalidConfig, "max_inflight must be >= 1");
      break;
  }
  if (!(timeout_s > 0)) throw Error(ErrorCode::kInvalidConfig, "embedder timeout must be > 0");
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_token_byte(c)) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

ReferenceEmbedder::ReferenceEmbedder(std::size_t dim) : dim_(dim) {
  EmbedderConfig config;
  config.dim = dim;
  config.validate();
}

EmbeddingVector ReferenceEmbedder::embed(std::string_view text) {
  require_text(text);
  std::map<std::string, std::size_t> counts;
  for (auto& token : tokenize(text)) ++counts[std::move(token)];
  if (counts.empty()) counts.emplace(std::string(trim(text)), 1);

  std::vector<double> values(dim_, 0.0);
  for (const auto& [token, count] : counts) {
    double weight = 0.0;
    for (std::size_t seen = 0; seen < count; ++seen) weight += 1.0 / static_cast<double>(1 + seen);
    auto h = fnv1a64(token);
    double sign = (h >> 63) == 0 ? 1.0 : -1.0;
    values[h % dim_] += sign * weight;
  }
  // Colliding tokens can cancel exactly. Fall back to one bucket keyed by the
  // sorted token multiset so the result stays order-independent.
  if (l2_norm(values) == 0.0) {
    std::string canonical;
    for (const auto& [token, count] : counts) {
      for (std::size_t i = 0; i < count; ++i) {
        if (!canonical.empty()) canonical += ' ';
        canonical += token;
      }
    }
    auto h = fnv1a64(canonical);
    values[h % dim_] = (h >> 63) == 0 ? 1.0 : -1.0;
  }
  return normalized(std::move(values));
}

RemoteEmbedder::RemoteEmbedder(EmbedderConfig config) : config_(std::move(config)) {
  config_.kind = EmbedderKind::kRemote;
  config_.validate();
}

std::optional<std::size_t> RemoteEmbedder::dim() const {
  std::lock_guard lock(mu_);
  return dim_;
}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) {
  require_text(text);
  {
    std::unique_lock lock(mu_);
    slot_cv_.wait(lock, [&] { return inflight_ < config_.max_inflight; });
    ++inflight_;
  }
  struct Release {
    RemoteEmbedder* self;
    ~Release() {
      {
        std::lock_guard lock(self->mu_);
        --self->inflight_;
      }
      self->slot_cv_.notify_one();
    }
  } release{this};

  nlohmann::json request = {{"input", std::string(text)}};
  auto response = detail::post_json(config_.endpoint_url,
                                    request.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace),
                                    config_.timeout_s);
  if (response.failure != detail::HttpFailure::kNone) {
    throw Error(ErrorCode::kRemoteUnavailable, "embedding endpoint failed: " + response.error);
  }

  auto doc = nlohmann::json::parse(response.body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("embedding") || !doc["embedding"].is_array()) {
    throw Error(ErrorCode::kRemoteUnavailable, "embedding endpoint returned an unexpected body");
  }
  std::vector<double> values;
  values.reserve(doc["embedding"].size());
  for (const auto& v : doc["embedding"]) {
    if (!v.is_number()) throw Error(ErrorCode::kRemoteUnavailable, "embedding contains a non-number");
    values.push_back(v.get<double>());
  }
  if (values.empty()) throw Error(ErrorCode::kRemoteUnavailable, "embedding endpoint returned no values");

  {
    std::lock_guard lock(mu_);
    if (!dim_) {
      dim_ = values.size();
    } else if (*dim_ != values.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "embedding endpoint changed dimension from " + std::to_string(*dim_) + " to " +
                      std::to_string(values.size()));
    }
  }
  return normalized(std::move(values));
}

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config) {
  config.validate();
  if (config.kind == EmbedderKind::kReference) return std::make_unique<ReferenceEmbedder>(config.dim);
  return std::make_unique<RemoteEmbedder>(config);
}

}  // namespace explainer
