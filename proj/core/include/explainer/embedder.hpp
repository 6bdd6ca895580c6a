#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace explainer {

/// A dense, L2-normalized embedding. All entries are finite.
struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
  std::span<const double> view() const noexcept { return values; }

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

double l2_norm(std::span<const double> v) noexcept;

/// Scales `values` to unit length. Throws kEmbedderFailure if the input has
/// a non-finite entry or zero norm.
EmbeddingVector normalized(std::vector<double> values);

enum class EmbedderKind { kReference, kRemote };

struct EmbedderConfig {
  EmbedderKind kind = EmbedderKind::kReference;
  std::size_t dim = 256;       // reference only
  std::string endpoint_url;    // remote only
  double timeout_s = 10.0;
  std::size_t max_inflight = 1;

  /// Throws kInvalidConfig when dim < 8 (reference) or the URL is empty (remote).
  void validate() const;
};

class Embedder {
 public:
  virtual ~Embedder() = default;

  /// Embeds a document. Throws kEmptyText when `text` is blank.
  virtual EmbeddingVector embed(std::string_view text) = 0;

  /// Queries share the document space; the default forwards to embed().
  virtual EmbeddingVector embed_query(std::string_view question) { return embed(question); }

  /// Dimension of produced vectors, if already known.
  virtual std::optional<std::size_t> dim() const = 0;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Lowercases ASCII letters and splits on runs of bytes that are neither
/// ASCII alphanumerics nor part of a multi-byte UTF-8 sequence.
std::vector<std::string> tokenize(std::string_view text);

/// Deterministic hashed bag-of-words embedder.
///
/// The i-th occurrence (0-based) of a token within one text adds
/// sign * 1/(1+i) to bucket fnv1a64(token) mod dim, where sign is -1 when
/// bit 63 of the hash is set. The sum is L2-normalized. Occurrence weights
/// are accumulated per token and applied in lexicographic token order, so the
/// output depends only on the token multiset and is bit-identical everywhere.
/// If colliding tokens cancel to an all-zero sum, a single bucket keyed by
/// the space-joined sorted tokens is used instead.
class ReferenceEmbedder final : public Embedder {
 public:
  explicit ReferenceEmbedder(std::size_t dim = 256);

  EmbeddingVector embed(std::string_view text) override;
  std::optional<std::size_t> dim() const override { return dim_; }

 private:
  std::size_t dim_;
};

/// Client for an embeddings endpoint: POST {"input": text} -> {"embedding": [...]}.
/// The first successful response fixes the session dimension.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(EmbedderConfig config);

  EmbeddingVector embed(std::string_view text) override;
  std::optional<std::size_t> dim() const override;

 private:
  EmbedderConfig config_;
  mutable std::mutex mu_;
  std::optional<std::size_t> dim_;
  std::condition_variable slot_cv_;
  std::size_t inflight_ = 0;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config);

}  // namespace explainer
