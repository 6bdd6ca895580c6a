#include "explainer/engine.hpp"

#include <algorithm>
#include <chrono>

#include <fmt/format.h>

#include "json.hpp"

namespace explainer {

namespace {

using Clock = std::chrono::steady_clock;

TemplateRegistry load_templates(const Config& config) {
  auto registry = config.template_dir.empty() ? TemplateRegistry::builtin()
                                              : TemplateRegistry::from_directory(config.template_dir);
  registry.get(config.template_id);  // fail fast on an unknown id
  return registry;
}

double timing(double value, const ReportFormat& format) { return format.redact_timings ? 0.0 : value; }

}  // namespace

Engine::Engine(Config config) : Engine(std::move(config), nullptr, nullptr) {}

Engine::Engine(Config config, std::unique_ptr<Embedder> embedder, std::unique_ptr<LlmBackend> backend)
    : config_(std::move(config)),
      templates_(load_templates(config_)),
      embedder_(embedder ? std::move(embedder) : make_embedder(config_.embedder)),
      backend_(backend ? std::move(backend) : make_backend(config_.backend)),
      ingest_(*embedder_, store_),
      session_id_("session-1") {
  config_.validate();
  worker_ = std::thread([this] { worker_loop(); });
}

Engine::~Engine() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  work_cv_.notify_all();
  settled_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void Engine::worker_loop() {
  for (;;) {
    {
      std::unique_lock lock(mu_);
      work_cv_.wait(lock, [&] { return stopping_ || has_work_; });
      if (stopping_) return;
      has_work_ = false;
    }
    std::optional<std::string> failure;
    try {
      for (;;) {
        std::size_t done = ingest_.drain_step();
        {
          std::lock_guard lock(mu_);  // pairs with the predicate check in wait_settled
          if (stopping_) return;
        }
        settled_cv_.notify_all();
        if (done == 0) break;
      }
    } catch (const Error& e) {
      failure = e.what();
    } catch (const std::exception& e) {
      failure = std::string("unexpected: ") + e.what();
    }
    {
      std::lock_guard lock(mu_);
      if (failure) worker_error_ = std::move(failure);
    }
    settled_cv_.notify_all();
  }
}

bool Engine::ingest_record(LogRecord record) {
  bool accepted = ingest_.submit(std::move(record));
  if (accepted) {
    {
      std::lock_guard lock(mu_);
      has_work_ = true;
    }
    work_cv_.notify_one();
  }
  return accepted;
}

void Engine::wait_settled(std::uint64_t seq) {
  std::unique_lock lock(mu_);
  if (worker_error_ || !ingest_.settled_through(seq)) {
    worker_error_.reset();
    has_work_ = true;
    work_cv_.notify_one();
  }
  settled_cv_.wait(lock, [&] { return stopping_ || worker_error_ || ingest_.settled_through(seq); });
  if (!ingest_.settled_through(seq)) {
    throw Error(ErrorCode::kEmbedderFailure, worker_error_ ? *worker_error_ : std::string("engine stopping"));
  }
}

void Engine::wait_drained() { wait_settled(ingest_.last_seq()); }

ExplanationResult Engine::ask(const std::string& question, AskOptions options) {
  std::lock_guard ask_lock(ask_mu_);
  if (trim(question).empty()) throw Error(ErrorCode::kEmptyQuestion, "question is empty");
  RetrievalParams retrieval = options.params.value_or(config_.retrieval);
  retrieval.validate();

  wait_settled(ingest_.last_seq());
  if (store_.size() == 0) throw Error(ErrorCode::kEmptyStore, "no logs have been ingested");

  auto start = Clock::now();
  ExplanationResult result;
  result.label = std::move(options.label);
  result.question = question;
  result.retrieval_params = retrieval;

  auto query = embedder_->embed_query(question);
  result.context = order_context(store_.retrieve(query, retrieval));
  auto bundle = build_prompt(templates_.get(config_.template_id), result.context, question);

  try {
    auto completion = backend_->complete(bundle);
    result.answer = std::move(completion.text);
    result.backend_latency_s = completion.latency_s;
  } catch (const Error& e) {
    result.error = std::string(to_string(e.code())) + ": " + e.what();
    result.question_time_s = std::chrono::duration<double>(Clock::now() - start).count();
    if (options.record) record_question(result);
    throw AskError(e.code(), e.what(), std::move(result));
  }
  result.question_time_s =
      std::max(std::chrono::duration<double>(Clock::now() - start).count(), result.backend_latency_s);
  if (options.record) record_question(result);
  return result;
}

void Engine::record_question(ExplanationResult result) {
  std::lock_guard lock(mu_);
  questions_.push_back(std::move(result));
}

SessionReport Engine::report() const {
  std::lock_guard lock(mu_);
  SessionReport out;
  out.session_id = session_id_;
  out.execution_time_s = execution_time_s_;
  out.ingest = ingest_.stats();
  out.questions = questions_;
  out.scenario = scenario_;
  return out;
}

void Engine::reset() {
  std::lock_guard ask_lock(ask_mu_);
  ingest_.reset();
  store_.clear();
  std::lock_guard lock(mu_);
  has_work_ = false;
  worker_error_.reset();
  questions_.clear();
  execution_time_s_ = 0.0;
  scenario_.reset();
  session_id_ = "session-" + std::to_string(++session_counter_);
}

void Engine::close() { ingest_.close(); }

void Engine::set_session_id(std::string id) {
  std::lock_guard lock(mu_);
  session_id_ = std::move(id);
}

std::string Engine::session_id() const {
  std::lock_guard lock(mu_);
  return session_id_;
}

void Engine::set_execution_time(double seconds) {
  std::lock_guard lock(mu_);
  execution_time_s_ = seconds;
}

void Engine::set_scenario(std::optional<ScenarioSummary> summary) {
  std::lock_guard lock(mu_);
  scenario_ = std::move(summary);
}

void Engine::load_store(const std::string& path) {
  std::lock_guard ask_lock(ask_mu_);
  wait_drained();
  VectorStore::load_file(path, store_);
  std::uint64_t max_id = 0;
  for (const auto& e : store_.snapshot()) max_id = std::max(max_id, e.id);
  ingest_.resume_after(max_id);
}

void Engine::save_store(const std::string& path) {
  wait_drained();
  store_.dump_file(path);
}

bool Engine::backend_healthy() { return backend_->health_check(); }

std::string report_to_json(const SessionReport& report, ReportFormat format) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["session_id"] = report.session_id;
  doc["execution_time_s"] = timing(report.execution_time_s, format);
  doc["ingest"] = {
      {"received", report.ingest.received},
      {"deduplicated", report.ingest.deduplicated},
      {"processed", report.ingest.processed},
      {"queue_depth", report.ingest.queue_depth},
      {"processing_time_s", timing(report.ingest.processing_time_s, format)},
  };
  if (report.scenario) {
    doc["scenario"] = {
        {"run", report.scenario->run},
        {"seed", report.scenario->seed},
        {"records", report.scenario->records},
        {"completion_line_present", report.scenario->completion_line_present},
    };
  }
  ordered_json questions = ordered_json::array();
  for (const auto& q : report.questions) {
    ordered_json item;
    item["label"] = q.label;
    item["question"] = q.question;
    item["answer"] = q.answer;
    ordered_json context = ordered_json::array();
    for (const auto& e : q.context.entries) {
      context.push_back({{"id", e.id},
                         {"ts", e.record.timestamp},
                         {"ts_iso", format_iso8601_ms(e.record.timestamp)},
                         {"msg", e.record.message}});
    }
    item["context"] = std::move(context);
    item["retrieval_params"] = {{"k", q.retrieval_params.k}, {"lambda", q.retrieval_params.lambda}};
    item["question_time_s"] = timing(q.question_time_s, format);
    item["backend_latency_s"] = timing(q.backend_latency_s, format);
    item["error"] = q.error;
    questions.push_back(std::move(item));
  }
  doc["questions"] = std::move(questions);
  return doc.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

std::string report_to_table(const SessionReport& report, ReportFormat format) {
  std::string run = report.scenario ? report.scenario->run : report.session_id;
  std::string out;

  const std::vector<std::string> headers = {"Run",          "Execution Time(s)",    "Total Logs in Rosout",
                                            "Deduplicated", "Embeddings Processed", "Processing Time(s)"};
  const std::vector<std::string> row = {
      run,
      fmt::format("{:.3f}", timing(report.execution_time_s, format)),
      std::to_string(report.ingest.received),
      std::to_string(report.ingest.deduplicated),
      std::to_string(report.ingest.processed),
      fmt::format("{:.3f}", timing(report.ingest.processing_time_s, format)),
  };
  auto emit = [&out](const std::vector<std::string>& head, const std::vector<std::string>& cells) {
    std::vector<std::size_t> width(head.size());
    for (std::size_t i = 0; i < head.size(); ++i) width[i] = std::max(head[i].size(), cells[i].size());
    auto line = [&](const std::vector<std::string>& v) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += "  ";
        out += fmt::format("{:<{}}", v[i], width[i]);
      }
      while (!out.empty() && out.back() == ' ') out.pop_back();
      out += '\n';
    };
    line(head);
    line(cells);
  };
  emit(headers, row);

  if (!report.questions.empty()) {
    out += '\n';
    std::vector<std::string> head = {""};
    std::vector<std::string> cells = {run};
    for (std::size_t i = 0; i < report.questions.size(); ++i) {
      const auto& q = report.questions[i];
      head.push_back(q.label.empty() ? "Q" + std::to_string(i + 1) : q.label);
      cells.push_back(fmt::format("{:.3f}", timing(q.question_time_s, format)));
    }
    emit(head, cells);
  }
  return out;
}

}  // namespace explainer
