#pragma once

#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "explainer/config.hpp"
#include "explainer/context_prompt.hpp"
#include "explainer/embedder.hpp"
#include "explainer/error.hpp"
#include "explainer/ingest.hpp"
#include "explainer/llm_backend.hpp"
#include "explainer/vector_store.hpp"

namespace explainer {

struct ExplanationResult {
  std::string label;  // e.g. "UQ1"; empty for ad-hoc questions
  std::string question;
  std::string answer;
  ContextSet context;
  RetrievalParams retrieval_params;
  double question_time_s = 0.0;   // retrieval + prompt + completion, wall clock
  double backend_latency_s = 0.0;
  std::string error;              // empty on success, else "<ErrorCode>: message"
};

/// Facts about the scenario that produced the session, when there was one.
struct ScenarioSummary {
  std::string run;
  std::uint64_t seed = 0;
  std::size_t records = 0;
  bool completion_line_present = false;
};

struct SessionReport {
  std::string session_id;
  double execution_time_s = 0.0;
  IngestStats ingest;
  std::vector<ExplanationResult> questions;
  std::optional<ScenarioSummary> scenario;
};

struct ReportFormat {
  /// Writes every measured duration as 0 so that reports of identical runs
  /// compare byte-for-byte.
  bool redact_timings = false;
};

std::string report_to_json(const SessionReport& report, ReportFormat format = {});
/// Aligned plain-text tables: the per-run log/processing summary, then one
/// row of per-question generation times.
std::string report_to_table(const SessionReport& report, ReportFormat format = {});

/// Raised by Engine::ask when a stage after retrieval fails. The partial
/// result still carries the context that would have been sent.
class AskError : public Error {
 public:
  AskError(ErrorCode code, const std::string& message, ExplanationResult partial)
      : Error(code, message), partial_(std::move(partial)) {}

  const ExplanationResult& partial() const noexcept { return partial_; }

 private:
  ExplanationResult partial_;
};

struct AskOptions {
  std::optional<RetrievalParams> params;  // engine config when unset
  std::string label;
  bool record = true;  // append the result (or failure) to the session report
};

/// One explanation session: ingestion queue, embedder, vector store, prompt
/// template and answer backend.
///
/// A background worker drains the ingest queue as records arrive. ask()
/// first waits until every record submitted before the call has been
/// embedded, so answers always reflect all logs seen so far. asks are
/// serialized.
class Engine {
 public:
  explicit Engine(Config config);
  /// Injects components (tests, custom deployments). Null pointers fall back
  /// to the ones described by `config`.
  Engine(Config config, std::unique_ptr<Embedder> embedder, std::unique_ptr<LlmBackend> backend);
  ~Engine();

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Returns false when the record was dropped as a consecutive duplicate.
  /// Throws kSessionClosed after close().
  bool ingest_record(LogRecord record);

  /// Blocks until all records submitted so far are embedded. Throws
  /// kEmbedderFailure if the worker hit an embedder error (it retries on the
  /// next submit or wait).
  void wait_drained();

  /// Throws kEmptyQuestion, kInvalidArgument, kEmptyStore, kEmbedderFailure,
  /// or AskError for backend failures.
  ExplanationResult ask(const std::string& question, AskOptions options = {});

  /// Appends a result produced with `record = false`.
  void record_question(ExplanationResult result);

  SessionReport report() const;
  void reset();
  void close();

  void set_session_id(std::string id);
  std::string session_id() const;
  void set_execution_time(double seconds);
  void set_scenario(std::optional<ScenarioSummary> summary);

  /// Loads a persisted store; subsequent ingestion continues after its ids.
  void load_store(const std::string& path);
  void save_store(const std::string& path);

  bool backend_healthy();

  const Config& config() const noexcept { return config_; }
  const VectorStore& store() const noexcept { return store_; }
  IngestStats ingest_stats() const { return ingest_.stats(); }

 private:
  void worker_loop();
  void wait_settled(std::uint64_t seq);

  Config config_;
  TemplateRegistry templates_;
  std::unique_ptr<Embedder> embedder_;
  std::unique_ptr<LlmBackend> backend_;
  VectorStore store_;
  IngestPipeline ingest_;

  std::mutex ask_mu_;

  mutable std::mutex mu_;  // guards the fields below
  std::condition_variable work_cv_;
  std::condition_variable settled_cv_;
  bool stopping_ = false;
  bool has_work_ = false;
  std::optional<std::string> worker_error_;
  std::string session_id_;
  std::uint64_t session_counter_ = 1;
  double execution_time_s_ = 0.0;
  std::optional<ScenarioSummary> scenario_;
  std::vector<ExplanationResult> questions_;

  std::thread worker_;
};

}  // namespace explainer
