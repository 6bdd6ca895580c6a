#include "explainer/vector_store.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>

#include "explainer/error.hpp"
#include "json.hpp"

namespace explainer {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double cosine_with_norms(const std::vector<double>& a, double norm_a, const std::vector<double>& b,
                         double norm_b) noexcept {
  double denom = norm_a * norm_b;
  if (denom == 0.0) return 0.0;
  return dot(a, b) / denom;
}

[[noreturn]] void dim_mismatch(std::size_t expected, std::size_t got) {
  throw Error(ErrorCode::kDimensionMismatch,
              "dimension mismatch: expected " + std::to_string(expected) + ", got " + std::to_string(got));
}

}  // namespace

void RetrievalParams::validate() const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "lambda must be in [0, 1]");
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) dim_mismatch(a.dim(), b.dim());
  return cosine_with_norms(a.values, l2_norm(a.values), b.values, l2_norm(b.values));
}

void VectorStore::insert(EmbeddedEntry entry) {
  std::unique_lock lock(mu_);
  if (dim_ && *dim_ != entry.vector.dim()) dim_mismatch(*dim_, entry.vector.dim());
  if (entry.vector.dim() == 0) throw Error(ErrorCode::kDimensionMismatch, "empty embedding vector");
  if (index_.contains(entry.id)) {
    throw Error(ErrorCode::kDuplicateId, "duplicate entry id " + std::to_string(entry.id));
  }
  if (!dim_) dim_ = entry.vector.dim();
  index_.emplace(entry.id, entries_.size());
  norms_.push_back(l2_norm(entry.vector.values));
  entries_.push_back(std::move(entry));
}

std::vector<EmbeddedEntry> VectorStore::retrieve(const EmbeddingVector& query,
                                                 const RetrievalParams& params) const {
  params.validate();
  std::shared_lock lock(mu_);
  if (entries_.empty()) throw Error(ErrorCode::kEmptyStore, "vector store is empty");
  if (query.dim() != *dim_) dim_mismatch(*dim_, query.dim());

  const std::size_t n = entries_.size();
  const std::size_t want = std::min(params.k, n);
  const double query_norm = l2_norm(query.values);

  std::vector<double> relevance(n);
  for (std::size_t i = 0; i < n; ++i) {
    relevance[i] = cosine_with_norms(query.values, query_norm, entries_[i].vector.values, norms_[i]);
  }

  // max_sim[i] tracks max cosine to the selected set; updated after each pick
  // so a round costs O(n) similarity evaluations.
  std::vector<double> max_sim(n, 0.0);
  std::vector<bool> taken(n, false);
  std::vector<EmbeddedEntry> out;
  out.reserve(want);

  for (std::size_t round = 0; round < want; ++round) {
    std::size_t best = n;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      double diversity = round == 0 ? 0.0 : max_sim[i];
      double score = params.lambda * relevance[i] - (1.0 - params.lambda) * diversity;
      if (best == n || score > best_score || (score == best_score && entries_[i].id < entries_[best].id)) {
        best = i;
        best_score = score;
      }
    }
    taken[best] = true;
    out.push_back(entries_[best]);
    if (round + 1 == want) break;
    const auto& picked = entries_[best].vector.values;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      double sim = cosine_with_norms(entries_[i].vector.values, norms_[i], picked, norms_[best]);
      if (round == 0 || sim > max_sim[i]) max_sim[i] = sim;
    }
  }
  return out;
}

std::size_t VectorStore::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::optional<std::size_t> VectorStore::dim() const {
  std::shared_lock lock(mu_);
  return dim_;
}

std::vector<EmbeddedEntry> VectorStore::snapshot() const {
  std::shared_lock lock(mu_);
  return entries_;
}

void VectorStore::clear() {
  std::unique_lock lock(mu_);
  entries_.clear();
  norms_.clear();
  index_.clear();
  dim_.reset();
}

void VectorStore::dump(std::ostream& out) const {
  std::shared_lock lock(mu_);
  nlohmann::ordered_json header;
  header["store_version"] = 1;
  header["dim"] = dim_.value_or(0);
  out << header.dump() << '\n';
  for (const auto& e : entries_) {
    nlohmann::ordered_json line;
    line["id"] = e.id;
    nlohmann::ordered_json rec;
    rec["ts"] = e.record.timestamp;
    rec["msg"] = e.record.message;
    rec["src"] = e.record.source;
    rec["lvl"] = std::string(to_string(e.record.level));
    line["record"] = std::move(rec);
    line["vector"] = e.vector.values;
    out << line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

void VectorStore::dump_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  dump(out);
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

void VectorStore::load(std::istream& in, VectorStore& into) {
  auto bad = [](const std::string& why) -> Error {
    return Error(ErrorCode::kMalformedStore, "malformed store file: " + why);
  };
  std::string line;
  if (!std::getline(in, line)) throw bad("missing header");
  auto header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object() || header.value("store_version", 0) != 1 ||
      !header.contains("dim") || !header["dim"].is_number_unsigned()) {
    throw bad("bad header");
  }
  auto dim = header["dim"].get<std::size_t>();

  into.clear();
  if (dim > 0) {
    std::unique_lock lock(into.mu_);
    into.dim_ = dim;
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("id") || !doc["id"].is_number_unsigned() ||
        !doc.contains("record") || !doc.contains("vector") || !doc["vector"].is_array()) {
      throw bad("line " + std::to_string(line_no));
    }
    EmbeddedEntry entry;
    entry.id = doc["id"].get<std::uint64_t>();
    try {
      entry.record = parse_log_line(doc["record"].dump());
    } catch (const Error& e) {
      throw bad("line " + std::to_string(line_no) + ": " + e.what());
    }
    entry.record.seq = entry.id;
    for (const auto& v : doc["vector"]) {
      if (!v.is_number()) throw bad("line " + std::to_string(line_no) + ": non-numeric vector entry");
      entry.vector.values.push_back(v.get<double>());
    }
    into.insert(std::move(entry));
  }
}

void VectorStore::load_file(const std::string& path, VectorStore& into) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open store file '" + path + "'");
  load(in, into);
}

}  // namespace explainer
