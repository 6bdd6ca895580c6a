// explainer: generate navigation traces, ingest logs, and ask questions about
// them through the retrieval + prompt + LLM pipeline.
//
// Exit codes: 0 ok, 1 I/O or runtime failure, 2 bad arguments or config,
// 3 question asked with no logs ingested, 4 answer backend failure.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "explainer/config.hpp"
#include "explainer/engine.hpp"
#include "explainer/evaluation.hpp"
#include "explainer/scenario_sim.hpp"
#include "explainer/service_api.hpp"

namespace {

using namespace explainer;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitEmptyStore = 3;
constexpr int kExitBackend = 4;

constexpr const char* kDefaultSession = "explainer-session.jsonl";

struct Globals {
  std::optional<std::string> config_path;
};

Config load_config(const Globals& g) { return resolve_config(g.config_path); }

void print_context(std::ostream& out, const ContextSet& context) {
  out << "--- context (" << context.entries.size() << " lines) ---\n";
  if (!context.rendered.empty()) out << context.rendered << '\n';
}

void print_result(std::ostream& out, const ExplanationResult& r) {
  out << r.answer << '\n';
  print_context(out, r.context);
  out << "--- timings ---\n"
      << "question_time_s: " << r.question_time_s << '\n'
      << "backend_latency_s: " << r.backend_latency_s << '\n';
}

/// Fills the engine from --file (fresh ingest) or else from the session store.
void populate(Engine& engine, const std::optional<std::string>& file, const std::string& session) {
  if (file) {
    for (auto& r : read_log_file(*file)) engine.ingest_record(std::move(r));
    engine.wait_drained();
    return;
  }
  std::error_code ec;
  if (std::filesystem::exists(session, ec)) engine.load_store(session);
}

/// Asks one question and prints it. Returns an exit code.
int ask_and_print(Engine& engine, const std::string& question, const AskOptions& options) {
  try {
    print_result(std::cout, engine.ask(question, options));
    return kExitOk;
  } catch (const AskError& e) {
    std::cerr << "backend failure: " << e.what() << '\n';
    print_context(std::cout, e.partial().context);
    return kExitBackend;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.code() == ErrorCode::kEmptyStore) return kExitEmptyStore;
    if (e.code() == ErrorCode::kEmptyQuestion || e.code() == ErrorCode::kInvalidArgument) return kExitUsage;
    return kExitFailure;
  }
}

int cmd_generate(const std::string& run_name, std::uint64_t seed, std::size_t noise, const std::string& out) {
  ScenarioSpec spec;
  spec.run = *parse_run(run_name);
  spec.seed = seed;
  spec.noise_repeat = noise;
  auto corpus = generate(spec);
  write_log_file(out, corpus.records);
  std::cerr << "wrote " << corpus.records.size() << " records to " << out << '\n';
  return kExitOk;
}

int cmd_ingest(const Globals& g, const std::string& file, const std::string& session) {
  Engine engine(load_config(g));
  std::size_t accepted = 0, total = 0;
  for (auto& r : read_log_file(file)) {
    ++total;
    accepted += engine.ingest_record(std::move(r)) ? 1 : 0;
  }
  engine.wait_drained();
  engine.save_store(session);
  auto stats = engine.ingest_stats();
  std::cout << "received: " << stats.received << "\naccepted: " << accepted
            << "\ndeduplicated: " << stats.deduplicated << "\nprocessed: " << stats.processed
            << "\nprocessing_time_s: " << stats.processing_time_s << "\nsession: " << session << '\n';
  return kExitOk;
}

int cmd_ask(const Globals& g, const std::string& question, const std::optional<std::size_t>& k,
            const std::optional<double>& lambda, const std::optional<std::string>& file, const std::string& session) {
  Engine engine(load_config(g));
  populate(engine, file, session);
  AskOptions options;
  RetrievalParams params = engine.config().retrieval;
  if (k) params.k = *k;
  if (lambda) params.lambda = *lambda;
  options.params = params;
  return ask_and_print(engine, question, options);
}

int cmd_repl(const Globals& g, const std::optional<std::string>& file, const std::string& session) {
  Engine engine(load_config(g));
  populate(engine, file, session);
  int worst = kExitOk;
  std::string line;
  std::cerr << "> " << std::flush;
  while (std::getline(std::cin, line)) {
    if (!trim(line).empty()) {
      int rc = ask_and_print(engine, std::string(trim(line)), {});
      std::cout << std::flush;
      if (rc != kExitOk) worst = rc;
    }
    std::cerr << "> " << std::flush;
  }
  std::cerr << '\n';
  return worst;
}

int cmd_eval(const Globals& g, const std::string& run_name, std::uint64_t seed, std::size_t noise,
             const std::optional<std::string>& questions_file, const std::string& report_path,
             const std::optional<std::string>& table_path, bool redact, bool both_variants, int retries) {
  EvalOptions options;
  options.run = *parse_run(run_name);
  options.seed = seed;
  options.noise_repeat = noise;
  options.both_id_variants = both_variants;
  options.retries = retries;
  if (questions_file) options.questions = read_questions_file(*questions_file);

  auto outcome = run_evaluation(load_config(g), options);
  ReportFormat format{redact};
  {
    std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write report '" + report_path + "'");
    out << report_to_json(outcome.report, format);
    if (!out.flush()) throw Error(ErrorCode::kIo, "write to '" + report_path + "' failed");
  }
  auto table = report_to_table(outcome.report, format);
  if (table_path) {
    std::ofstream out(*table_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write table '" + *table_path + "'");
    out << table;
  }
  std::cout << table;
  if (!outcome.report.scenario->completion_line_present) {
    std::cout << "\nnote: the run has no task-completed line\n";
  }
  if (outcome.backend_failed) {
    std::cerr << "backend failed for at least one question; report has context-only entries\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_serve(const Globals& g, const std::string& bind_host, int port, const std::optional<std::string>& file,
              const std::optional<std::string>& session, const std::string& static_dir,
              const std::vector<std::string>& cors) {
  // Block termination signals before any thread starts so only the waiter sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Engine engine(load_config(g));
  if (file || session) populate(engine, file, session.value_or(kDefaultSession));

  ServiceOptions options;
  options.static_dir = static_dir;
  if (!cors.empty()) options.cors_origins = cors;
  ApiServer server(engine, options);
  try {
    port = server.bind(bind_host, port);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  std::thread waiter([&server, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  waiter.detach();

  std::cerr << "listening on http://" << bind_host << ":" << port << '\n';
  server.listen();
  std::cerr << "shut down\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retrieval-augmented explanations for autonomous-system logs"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Config file (default: $EXPLAINER_CONFIG, then ./explainer.json)");

  const std::vector<std::string> runs = {"R1", "R2", "R3", "R4", "R5"};

  std::string run_name;
  std::uint64_t seed = 7;
  std::size_t noise = 20;
  std::string out_path;
  auto* gen = app.add_subcommand("generate", "Write a simulated navigation trace as JSONL");
  gen->add_option("--run", run_name, "Run R1..R5")->required()->check(CLI::IsMember(runs));
  gen->add_option("--seed", seed, "RNG seed");
  gen->add_option("--noise-repeat", noise, "Length of planner-noise bursts");
  gen->add_option("--out", out_path, "Output file")->required();

  std::string file;
  std::string session = kDefaultSession;
  auto* ingest = app.add_subcommand("ingest", "Embed a JSONL log file into a session store");
  ingest->add_option("--file", file, "JSONL log file")->required();
  ingest->add_option("--session", session, "Session store to write");

  std::string question;
  std::optional<std::size_t> k;
  std::optional<double> lambda;
  std::optional<std::string> ask_file;
  auto* ask = app.add_subcommand("ask", "Ask one question about the ingested logs");
  ask->add_option("--question,-q", question, "Question text")->required();
  ask->add_option("--k", k, "Context size")->check(CLI::PositiveNumber);
  ask->add_option("--lambda", lambda, "Relevance/diversity weight")->check(CLI::Range(0.0, 1.0));
  ask->add_option("--file", ask_file, "Ingest this JSONL file instead of loading the session");
  ask->add_option("--session", session, "Session store to load");

  auto* repl = app.add_subcommand("repl", "Interactive question loop (one question per line)");
  repl->add_option("--file", ask_file, "Ingest this JSONL file instead of loading the session");
  repl->add_option("--session", session, "Session store to load");

  std::optional<std::string> questions_file;
  std::string report_path = "report.json";
  std::optional<std::string> table_path;
  bool redact = false;
  bool both_variants = false;
  int retries = 2;
  auto* eval = app.add_subcommand("eval", "Simulate a run, ask UQ1-UQ8 and write a session report");
  eval->add_option("--run", run_name, "Run R1..R5")->required()->check(CLI::IsMember(runs));
  eval->add_option("--seed", seed, "RNG seed");
  eval->add_option("--noise-repeat", noise, "Length of planner-noise bursts");
  eval->add_option("--questions", questions_file, "One question per line (replaces UQ1-UQ8)");
  eval->add_option("--report", report_path, "Report JSON output path");
  eval->add_option("--table", table_path, "Also write the plain-text table here");
  eval->add_flag("--redact-timings", redact, "Write measured durations as 0 (byte-stable reports)");
  eval->add_flag("--both-id-variants", both_variants, "Also ask UQ4/UQ5 about the other waypoint");
  eval->add_option("--retries", retries, "Extra attempts per question on backend failure")
      ->check(CLI::NonNegativeNumber);

  int port = 8080;
  std::string bind_host = "127.0.0.1";
  std::optional<std::string> serve_session;
  std::string static_dir;
  std::vector<std::string> cors;
  auto* serve = app.add_subcommand("serve", "Run the HTTP/JSON query service");
  serve->add_option("--port", port, "Listen port")->check(CLI::Range(0, 65535));
  serve->add_option("--bind", bind_host, "Listen address");
  serve->add_option("--file", ask_file, "Pre-ingest this JSONL file");
  serve->add_option("--session", serve_session, "Pre-load this session store");
  serve->add_option("--static", static_dir, "Serve this directory at /")->check(CLI::ExistingDirectory);
  serve->add_option("--cors-origin", cors, "Allowed CORS origin (repeatable; default any)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_generate(run_name, seed, noise, out_path);
    if (*ingest) return cmd_ingest(g, file, session);
    if (*ask) return cmd_ask(g, question, k, lambda, ask_file, session);
    if (*repl) return cmd_repl(g, ask_file, session);
    if (*eval) {
      return cmd_eval(g, run_name, seed, noise, questions_file, report_path, table_path, redact, both_variants,
                      retries);
    }
    if (*serve) return cmd_serve(g, bind_host, port, ask_file, serve_session, static_dir, cors);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::kInvalidConfig:
      case ErrorCode::kInvalidArgument:
      case ErrorCode::kTemplateNotFound:
      case ErrorCode::kInvalidTemplate: return kExitUsage;
      default: return kExitFailure;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
