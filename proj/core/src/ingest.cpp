#include "explainer/ingest.hpp"

#include <chrono>

#include "explainer/error.hpp"

namespace explainer {

IngestPipeline::IngestPipeline(Embedder& embedder, VectorStore& store) : embedder_(embedder), store_(store) {}

bool IngestPipeline::submit(LogRecord record) {
  std::lock_guard lock(mu_);
  if (closed_) throw Error(ErrorCode::kSessionClosed, "ingest session is closed");
  record.seq = next_seq_++;
  ++stats_.received;
  if (last_message_ && *last_message_ == record.message) {
    ++stats_.deduplicated;
    return false;
  }
  last_message_ = record.message;
  queue_.push_back(std::move(record));
  ++stats_.queue_depth;
  return true;
}

std::size_t IngestPipeline::drain_step() {
  std::lock_guard drain_lock(drain_mu_);
  LogRecord head;
  {
    std::lock_guard lock(mu_);
    if (queue_.empty()) return 0;
    head = queue_.front();
  }

  auto start = std::chrono::steady_clock::now();
  EmbeddingVector vector;
  try {
    vector = embedder_.embed(head.message);
  } catch (const Error& e) {
    throw Error(ErrorCode::kEmbedderFailure,
                "embedding seq " + std::to_string(head.seq) + " failed (" + std::string(to_string(e.code())) +
                    "): " + e.what());
  }
  auto id = head.seq;
  store_.insert(EmbeddedEntry{id, std::move(head), std::move(vector)});
  std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

  std::lock_guard lock(mu_);
  queue_.pop_front();
  --stats_.queue_depth;
  ++stats_.processed;
  stats_.processing_time_s += elapsed.count();
  return 1;
}

std::size_t IngestPipeline::drain_all() {
  std::size_t n = 0;
  while (drain_step() == 1) ++n;
  return n;
}

IngestStats IngestPipeline::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

std::uint64_t IngestPipeline::last_seq() const {
  std::lock_guard lock(mu_);
  return next_seq_ - 1;
}

std::optional<std::uint64_t> IngestPipeline::pending_head_seq() const {
  std::lock_guard lock(mu_);
  if (queue_.empty()) return std::nullopt;
  return queue_.front().seq;
}

bool IngestPipeline::settled_through(std::uint64_t seq) const {
  std::lock_guard lock(mu_);
  return queue_.empty() || queue_.front().seq > seq;
}

void IngestPipeline::resume_after(std::uint64_t seq) {
  std::lock_guard lock(mu_);
  if (seq >= next_seq_) next_seq_ = seq + 1;
}

void IngestPipeline::close() {
  std::lock_guard lock(mu_);
  closed_ = true;
}

bool IngestPipeline::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

void IngestPipeline::reset() {
  std::lock_guard drain_lock(drain_mu_);
  std::lock_guard lock(mu_);
  queue_.clear();
  last_message_.reset();
  next_seq_ = 1;
  stats_ = {};
  closed_ = false;
}

}  // namespace explainer
