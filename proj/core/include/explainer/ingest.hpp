#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>

#include "explainer/embedder.hpp"
#include "explainer/log_model.hpp"
#include "explainer/vector_store.hpp"

namespace explainer {

struct IngestStats {
  std::uint64_t received = 0;
  std::uint64_t deduplicated = 0;
  std::uint64_t processed = 0;
  std::uint64_t queue_depth = 0;
  double processing_time_s = 0.0;  // cumulative embed + store time

  friend bool operator==(const IngestStats&, const IngestStats&) = default;
};

/// Lossless sequential ingestion queue.
///
/// A record whose message is byte-identical to the previously *submitted*
/// message is counted as deduplicated and never queued. Everything else is
/// queued without bound and embedded strictly in seq order by drain_step().
///
/// Threading: one producer calls submit(), one worker calls drain_step();
/// stats() is safe from any thread. The embedder and store must outlive the
/// pipeline.
class IngestPipeline {
 public:
  IngestPipeline(Embedder& embedder, VectorStore& store);

  IngestPipeline(const IngestPipeline&) = delete;
  IngestPipeline& operator=(const IngestPipeline&) = delete;

  /// Assigns the next seq to `record`. Returns false if it was dropped as a
  /// consecutive duplicate. Throws kSessionClosed after close().
  bool submit(LogRecord record);

  /// Embeds and stores the queue head. Returns 1 if a record was processed,
  /// 0 if the queue was empty. On embedder failure the record stays at the
  /// head and kEmbedderFailure is thrown.
  std::size_t drain_step();

  /// Drains until empty; returns the number processed.
  std::size_t drain_all();

  IngestStats stats() const;

  /// Highest seq handed out so far (0 before the first submit).
  std::uint64_t last_seq() const;
  /// Seq of the queue head, if any record is waiting.
  std::optional<std::uint64_t> pending_head_seq() const;
  /// True once every record with seq <= `seq` has been stored or dropped.
  bool settled_through(std::uint64_t seq) const;
  /// Continues numbering after `seq` (used when a persisted store is loaded).
  void resume_after(std::uint64_t seq);

  void close();
  bool closed() const;

  /// Clears the queue, dedup memory and counters, and reopens the session.
  /// The caller is responsible for clearing the store.
  void reset();

 private:
  Embedder& embedder_;
  VectorStore& store_;

  mutable std::mutex mu_;
  std::deque<LogRecord> queue_;
  std::optional<std::string> last_message_;
  std::uint64_t next_seq_ = 1;
  IngestStats stats_;
  bool closed_ = false;
  std::mutex drain_mu_;  // serializes drain_step against reset
};

}  // namespace explainer
