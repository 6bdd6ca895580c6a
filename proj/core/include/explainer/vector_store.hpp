#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "explainer/embedder.hpp"
#include "explainer/log_model.hpp"

namespace explainer {

/// A stored log paired with its embedding; `id` equals the record's seq.
struct EmbeddedEntry {
  std::uint64_t id = 0;
  LogRecord record;
  EmbeddingVector vector;
};

struct RetrievalParams {
  std::size_t k = 20;
  double lambda = 0.5;  // 1 = pure relevance, 0 = pure diversity

  /// Throws kInvalidArgument unless k >= 1 and 0 <= lambda <= 1.
  void validate() const;
};

/// dot(a, b) / (|a| |b|). Throws kDimensionMismatch on differing sizes.
/// Returns 0 when either vector has zero norm.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// Exhaustive in-memory store. One writer, many readers: insert takes an
/// exclusive lock, retrieve and the accessors take a shared one, so readers
/// never observe a half-inserted entry.
class VectorStore {
 public:
  VectorStore() = default;
  /// Pins the dimension up front instead of on first insert.
  explicit VectorStore(std::size_t dim) : dim_(dim) {}

  VectorStore(const VectorStore&) = delete;
  VectorStore& operator=(const VectorStore&) = delete;

  void insert(EmbeddedEntry entry);

  /// Greedy Maximal Marginal Relevance. Each round picks the unselected entry
  /// maximizing lambda*cos(query, d) - (1-lambda)*max_{s in selected} cos(d, s),
  /// with the max over an empty selection taken as 0 and ties going to the
  /// smaller id. Returns min(k, size()) entries in selection order.
  std::vector<EmbeddedEntry> retrieve(const EmbeddingVector& query, const RetrievalParams& params) const;

  std::size_t size() const;
  std::optional<std::size_t> dim() const;
  std::vector<EmbeddedEntry> snapshot() const;  // insertion order
  void clear();

  /// JSONL persistence: a {"store_version":1,"dim":n} header line, then one
  /// {"id":..,"record":{ts,msg,src,lvl},"vector":[..]} line per entry.
  void dump(std::ostream& out) const;
  void dump_file(const std::string& path) const;
  static void load(std::istream& in, VectorStore& into);
  static void load_file(const std::string& path, VectorStore& into);

 private:
  mutable std::shared_mutex mu_;
  std::optional<std::size_t> dim_;
  std::vector<EmbeddedEntry> entries_;
  std::vector<double> norms_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

}  // namespace explainer
