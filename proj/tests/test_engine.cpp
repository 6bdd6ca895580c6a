#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "explainer/engine.hpp"
#include "explainer/error.hpp"
#include "explainer/scenario_sim.hpp"
#include "json.hpp"
#include "oracles/dedup_oracle.hpp"
#include "oracles/mmr_oracle.hpp"

using namespace explainer;

namespace {

constexpr const char* kUq1 = "How many waypoints were received during the navigation task?";
constexpr const char* kWaypointList = "The waypoints received are: 9 6 7";

LogRecord rec(std::string msg, TimestampNs ts = 0) {
  LogRecord r;
  r.message = std::move(msg);
  r.timestamp = ts;
  return r;
}

class FailingBackend final : public LlmBackend {
 public:
  CompletionResult complete(const PromptBundle&) override {
    throw Error(ErrorCode::kBackendUnavailable, "model server down");
  }
  bool health_check() override { return false; }
  const BackendConfig& config() const override { return config_; }

 private:
  BackendConfig config_;
};

// Blocks every embed until released, so tests can hold records in the queue.
class GatedEmbedder final : public Embedder {
 public:
  EmbeddingVector embed(std::string_view text) override {
    while (!open.load()) std::this_thread::yield();
    return inner.embed(text);
  }
  std::optional<std::size_t> dim() const override { return inner.dim(); }

  std::atomic<bool> open{false};
  ReferenceEmbedder inner{256};
};

class BrokenEmbedder final : public Embedder {
 public:
  EmbeddingVector embed(std::string_view text) override {
    if (broken.load()) throw Error(ErrorCode::kEmbedderFailure, "down");
    return inner.embed(text);
  }
  std::optional<std::size_t> dim() const override { return inner.dim(); }

  std::atomic<bool> broken{true};
  ReferenceEmbedder inner{256};
};

std::vector<std::string> context_messages(const ExplanationResult& r) {
  std::vector<std::string> out;
  for (const auto& e : r.context.entries) out.push_back(e.record.message);
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

LogCorpus r1_corpus(std::uint64_t seed = 7) {
  ScenarioSpec spec;
  spec.run = Run::kR1;
  spec.seed = seed;
  return generate(spec);
}

}  // namespace

TEST(Engine, IngestMirrorsDedup) {
  Engine engine{Config{}};
  std::vector<bool> flags;
  for (const char* m : {"A", "A", "B", "A"}) flags.push_back(engine.ingest_record(rec(m)));
  EXPECT_EQ(flags, (std::vector<bool>{true, false, true, true}));
  engine.wait_drained();
  auto s = engine.ingest_stats();
  EXPECT_EQ(s.received, 4u);
  EXPECT_EQ(s.deduplicated, 1u);
  EXPECT_EQ(s.processed, 3u);
  EXPECT_EQ(s.queue_depth, 0u);
}

TEST(Engine, AskOnEmptyStore) {
  Engine engine{Config{}};
  try {
    engine.ask(kUq1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyStore);
  }
}

TEST(Engine, AskValidatesInputs) {
  Engine engine{Config{}};
  engine.ingest_record(rec("x"));
  try {
    engine.ask("  ");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyQuestion);
  }
  AskOptions bad;
  bad.params = RetrievalParams{.k = 0, .lambda = 0.5};
  try {
    engine.ask("q", bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(Engine, R1Uq1RetrievesWaypointList) {
  auto corpus = r1_corpus();
  Engine engine{Config{}};
  replay(corpus, engine);
  engine.wait_drained();

  // Brute-force check of what MMR should select under the reference embedder.
  ReferenceEmbedder emb(256);
  std::vector<oracle::Item> items;
  std::uint64_t target = 0;
  for (const auto& e : engine.store().snapshot()) {
    items.push_back({e.id, e.vector.values});
    if (e.record.message == kWaypointList) target = e.id;
  }
  ASSERT_NE(target, 0u);
  auto expected = oracle::mmr(items, emb.embed_query(kUq1).values, 20, 0.5);
  ASSERT_NE(std::find(expected.begin(), expected.end(), target), expected.end());

  auto result = engine.ask(kUq1);
  EXPECT_TRUE(contains(context_messages(result), kWaypointList));
  std::vector<std::uint64_t> got;
  for (const auto& e : result.context.entries) got.push_back(e.id);
  std::sort(got.begin(), got.end());
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(got, expected);
  EXPECT_EQ(result.answer.rfind("MOCK-ANSWER q=How many waypoints", 0), 0u);
  EXPECT_GE(result.question_time_s, result.backend_latency_s);
  EXPECT_GE(result.backend_latency_s, 0.0);
}

TEST(Engine, IdenticalAsksAreIdentical) {
  auto corpus = r1_corpus(3);
  Engine engine{Config{}};
  replay(corpus, engine);
  auto a = engine.ask("Has the robot encountered any obstacles during the navigation task?");
  auto b = engine.ask("Has the robot encountered any obstacles during the navigation task?");
  EXPECT_EQ(a.answer, b.answer);
  EXPECT_EQ(a.context.rendered, b.context.rendered);
  EXPECT_EQ(engine.report().questions.size(), 2u);
}

TEST(Engine, ContextIsChronological) {
  auto corpus = r1_corpus();
  Engine engine{Config{}};
  replay(corpus, engine);
  for (double lambda : {0.0, 0.5, 1.0}) {
    AskOptions opts;
    opts.params = RetrievalParams{.k = 15, .lambda = lambda};
    auto r = engine.ask("What happened with the waypoint with ID 6?", opts);
    for (std::size_t i = 1; i < r.context.entries.size(); ++i) {
      const auto& a = r.context.entries[i - 1].record;
      const auto& b = r.context.entries[i].record;
      ASSERT_TRUE(a.timestamp < b.timestamp || (a.timestamp == b.timestamp && a.seq < b.seq));
    }
  }
}

TEST(Engine, ReportConservesCounts) {
  auto corpus = r1_corpus();
  Engine engine{Config{}};
  replay(corpus, engine);
  engine.wait_drained();
  auto report = engine.report();
  EXPECT_EQ(report.ingest.received, corpus.records.size());
  EXPECT_EQ(report.ingest.queue_depth, 0u);
  EXPECT_EQ(report.ingest.received, report.ingest.deduplicated + report.ingest.processed);
  EXPECT_EQ(report.ingest.processed,
            oracle::count_survivors(corpus.records, [](const LogRecord& r) -> const std::string& { return r.message; }));
  EXPECT_EQ(engine.store().size(), report.ingest.processed);
}

TEST(Engine, FreshReportIsZeroed) {
  Engine engine{Config{}};
  auto r = engine.report();
  EXPECT_EQ(r.ingest, IngestStats{});
  EXPECT_TRUE(r.questions.empty());
  EXPECT_EQ(r.execution_time_s, 0.0);
}

TEST(Engine, ResetIsIdempotentAndKeepsConfig) {
  Config cfg;
  cfg.retrieval.k = 7;
  Engine engine{cfg};
  engine.ingest_record(rec("x"));
  engine.ask("q");
  auto before = engine.session_id();
  engine.reset();
  EXPECT_EQ(engine.store().size(), 0u);
  EXPECT_EQ(engine.ingest_stats(), IngestStats{});
  EXPECT_TRUE(engine.report().questions.empty());
  EXPECT_NE(engine.session_id(), before);
  engine.reset();
  EXPECT_EQ(engine.store().size(), 0u);
  EXPECT_EQ(engine.config().retrieval.k, 7u);
  EXPECT_TRUE(engine.ingest_record(rec("x")));  // dedup memory cleared
}

TEST(Engine, AskWaitsForQueueToDrain) {
  auto gated = std::make_unique<GatedEmbedder>();
  auto* gate = gated.get();
  Engine engine{Config{}, std::move(gated), nullptr};
  for (int i = 0; i < 50; ++i) engine.ingest_record(rec("record " + std::to_string(i), i));
  std::atomic<bool> answered{false};
  ExplanationResult result;
  std::thread asker([&] {
    AskOptions opts;
    opts.params = RetrievalParams{.k = 50, .lambda = 1.0};
    result = engine.ask("record", opts);
    answered = true;
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  EXPECT_FALSE(answered.load());
  EXPECT_GT(engine.ingest_stats().queue_depth, 0u);
  gate->open = true;
  asker.join();
  EXPECT_EQ(result.context.entries.size(), 50u);
  EXPECT_EQ(engine.ingest_stats().queue_depth, 0u);
}

TEST(Engine, RacingIngestAndAsk) {
  Engine engine{Config{}};
  engine.ingest_record(rec("seed record"));
  std::atomic<bool> done{false};
  std::thread producer([&] {
    for (int i = 0; i < 2000; ++i) engine.ingest_record(rec("event " + std::to_string(i % 17), i));
    done = true;
  });
  int asks = 0;
  while (!done || asks < 3) {
    auto before = engine.ingest_stats().received;
    auto r = engine.ask("event", {.params = RetrievalParams{.k = 5, .lambda = 0.5}, .label = "", .record = false});
    // Everything submitted before the ask started had been stored when it ran.
    EXPECT_GE(engine.store().size() + engine.ingest_stats().deduplicated, before);
    EXPECT_FALSE(r.context.entries.empty());
    ++asks;
  }
  producer.join();
}

TEST(Engine, BackendFailureCarriesContext) {
  Engine engine{Config{}, nullptr, std::make_unique<FailingBackend>()};
  engine.ingest_record(rec("Navigation to the waypoint with ID: 9 has aborted."));
  try {
    engine.ask("What happened?");
    FAIL();
  } catch (const AskError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendUnavailable);
    EXPECT_EQ(e.partial().context.entries.size(), 1u);
    EXPECT_TRUE(e.partial().answer.empty());
    EXPECT_FALSE(e.partial().error.empty());
  }
  ASSERT_EQ(engine.report().questions.size(), 1u);
  EXPECT_FALSE(engine.backend_healthy());
}

TEST(Engine, EmbedderFailureSurfacesAndRecovers) {
  auto broken = std::make_unique<BrokenEmbedder>();
  auto* handle = broken.get();
  Engine engine{Config{}, std::move(broken), nullptr};
  engine.ingest_record(rec("x"));
  try {
    engine.wait_drained();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmbedderFailure);
  }
  EXPECT_EQ(engine.ingest_stats().queue_depth, 1u);
  handle->broken = false;
  engine.wait_drained();
  EXPECT_EQ(engine.store().size(), 1u);
}

TEST(Engine, ClosedSessionRejectsIngest) {
  Engine engine{Config{}};
  engine.close();
  try {
    engine.ingest_record(rec("x"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSessionClosed);
  }
}

TEST(Engine, StorePersistenceRoundTrip) {
  auto path = testing::TempDir() + "/engine_store.jsonl";
  {
    Engine engine{Config{}};
    engine.ingest_record(rec("alpha", 1));
    engine.ingest_record(rec("beta", 2));
    engine.save_store(path);
  }
  Engine engine{Config{}};
  engine.load_store(path);
  EXPECT_EQ(engine.store().size(), 2u);
  engine.ingest_record(rec("gamma", 3));
  engine.wait_drained();
  EXPECT_EQ(engine.store().snapshot().back().id, 3u);
}

TEST(Report, JsonSchema) {
  Engine engine{Config{}};
  engine.ingest_record(rec("x", 1'700'000'000'123'000'000ULL));
  engine.ask("what?", {.params = std::nullopt, .label = "UQ1", .record = true});
  engine.set_scenario(ScenarioSummary{"R1", 7, 1, true});
  auto doc = nlohmann::json::parse(report_to_json(engine.report()));
  for (const char* key : {"session_id", "execution_time_s", "ingest", "scenario", "questions"}) {
    EXPECT_TRUE(doc.contains(key)) << key;
  }
  for (const char* key : {"received", "deduplicated", "processed", "queue_depth", "processing_time_s"}) {
    EXPECT_TRUE(doc["ingest"].contains(key)) << key;
  }
  const auto& q = doc["questions"][0];
  EXPECT_EQ(q["label"], "UQ1");
  EXPECT_EQ(q["context"][0]["ts_iso"], "2023-11-14T22:13:20.123Z");
  EXPECT_EQ(q["retrieval_params"]["k"], 20);
  EXPECT_EQ(q["error"], "");
}

TEST(Report, RedactedJsonIsStable) {
  auto run = [] {
    Engine engine{Config{}};
    engine.ingest_record(rec("x", 5));
    engine.ask("what?");
    engine.set_execution_time(1.5);
    return report_to_json(engine.report(), {.redact_timings = true});
  };
  auto a = run();
  EXPECT_EQ(a, run());
  EXPECT_NE(a.find("\"execution_time_s\": 0.0"), std::string::npos);
}

TEST(Report, TableHeaders) {
  SessionReport r;
  r.session_id = "s";
  r.scenario = ScenarioSummary{"R4", 7, 10, true};
  r.ingest.received = 10;
  r.ingest.deduplicated = 4;
  r.ingest.processed = 6;
  ExplanationResult q;
  q.label = "UQ1";
  q.question_time_s = 1.25;
  r.questions.push_back(q);
  auto table = report_to_table(r);
  std::istringstream lines(table);
  std::string header, values, blank, qhead, qrow;
  std::getline(lines, header);
  std::getline(lines, values);
  std::getline(lines, blank);
  std::getline(lines, qhead);
  std::getline(lines, qrow);
  for (const char* col :
       {"Run", "Execution Time(s)", "Total Logs in Rosout", "Embeddings Processed", "Processing Time(s)"}) {
    EXPECT_NE(header.find(col), std::string::npos) << col;
  }
  EXPECT_EQ(values.rfind("R4", 0), 0u);
  EXPECT_NE(values.find("10"), std::string::npos);
  EXPECT_TRUE(blank.empty());
  EXPECT_NE(qhead.find("UQ1"), std::string::npos);
  EXPECT_NE(qrow.find("1.250"), std::string::npos);
}
