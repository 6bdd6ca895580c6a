#include <gtest/gtest.h>

#include <thread>

#include "explainer/error.hpp"
#include "explainer/scenario_sim.hpp"
#include "explainer/service_api.hpp"
#include "httplib.h"
#include "json.hpp"

using namespace explainer;
using nlohmann::json;

namespace {

class DownBackend final : public LlmBackend {
 public:
  CompletionResult complete(const PromptBundle&) override {
    throw Error(ErrorCode::kBackendUnavailable, "model server down");
  }
  bool health_check() override { return false; }
  const BackendConfig& config() const override { return config_; }

 private:
  BackendConfig config_;
};

std::string batch(std::initializer_list<const char*> messages) {
  json records = json::array();
  std::uint64_t ts = 1'700'000'000'000'000'000ULL;
  for (const char* m : messages) records.push_back({{"ts", ts++}, {"msg", m}});
  return json{{"records", records}}.dump();
}

std::string r1_batch() {
  ScenarioSpec spec;
  spec.seed = 7;
  json records = json::array();
  for (const auto& r : generate(spec).records) records.push_back(json::parse(write_log_line(r)));
  return json{{"records", records}}.dump();
}

json strip_timings(json doc) {
  doc.erase("question_time_s");
  doc.erase("backend_latency_s");
  return doc;
}

}  // namespace

TEST(StatusMapping, Fixed) {
  EXPECT_EQ(http_status(ApiErrorCode::kBadRequest), 400);
  EXPECT_EQ(http_status(ApiErrorCode::kEmptyStore), 409);
  EXPECT_EQ(http_status(ApiErrorCode::kBackendUnavailable), 502);
  EXPECT_EQ(http_status(ApiErrorCode::kInternal), 500);
  EXPECT_EQ(to_string(ApiErrorCode::kEmptyStore), "EMPTY_STORE");
}

TEST(PostLogs, CountsDedup) {
  Engine engine{Config{}};
  ApiService api(engine);
  auto r = api.post_logs(batch({"A", "A", "B", "A"}));
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(json::parse(r.body), json::parse(R"({"received":4,"accepted":3,"deduplicated":1})"));
  r = api.post_logs(R"({"records":[]})");
  EXPECT_EQ(json::parse(r.body), json::parse(R"({"received":0,"accepted":0,"deduplicated":0})"));
}

TEST(PostLogs, AcceptsJsonlStrings) {
  Engine engine{Config{}};
  ApiService api(engine);
  auto r = api.post_logs(R"({"records":["{\"ts\":1,\"msg\":\"x\"}"]})");
  EXPECT_EQ(r.status, 200);
}

TEST(PostLogs, MalformedBatchIsAtomic) {
  Engine engine{Config{}};
  ApiService api(engine);
  for (const char* body : {
           R"({"records":[{"ts":1,"msg":"ok"},{"msg":"no ts"}]})",
           R"({"records":[{"ts":1,"msg":"ok"},{"ts":2,"msg":""}]})",
           R"({"records":[{"ts":1,"msg":"ok"},{"ts":2,"msg":"x","lvl":"LOUD"}]})",
           R"({"records":[{"ts":1,"msg":"ok"},7]})",
           R"({"records":{}})",
           R"({})",
           "garbage",
       }) {
    auto r = api.post_logs(body);
    EXPECT_EQ(r.status, 400) << body;
    EXPECT_EQ(json::parse(r.body)["error"]["code"], "BAD_REQUEST");
  }
  engine.wait_drained();
  EXPECT_EQ(engine.ingest_stats().received, 0u);
  EXPECT_EQ(engine.store().size(), 0u);
}

TEST(PostQuery, BeforeIngestIs409) {
  Engine engine{Config{}};
  ApiService api(engine);
  auto r = api.post_query(R"({"question":"How many waypoints were received during the navigation task?"})");
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(json::parse(r.body)["error"]["code"], "EMPTY_STORE");
}

TEST(PostQuery, AnswerAndChronologicalContext) {
  Engine engine{Config{}};
  ApiService api(engine);
  ASSERT_EQ(api.post_logs(r1_batch()).status, 200);
  auto r = api.post_query(R"({"question":"How many waypoints were received during the navigation task?"})");
  ASSERT_EQ(r.status, 200) << r.body;
  auto doc = json::parse(r.body);
  EXPECT_EQ(doc["answer"].get<std::string>().rfind("MOCK-ANSWER q=How many waypoints", 0), 0u);
  ASSERT_FALSE(doc["context"].empty());
  for (std::size_t i = 1; i < doc["context"].size(); ++i) {
    EXPECT_LE(doc["context"][i - 1]["ts"].get<std::uint64_t>(), doc["context"][i]["ts"].get<std::uint64_t>());
  }
  EXPECT_GE(doc["question_time_s"].get<double>(), doc["backend_latency_s"].get<double>());
}

TEST(PostQuery, IdempotentUnderMock) {
  Engine engine{Config{}};
  ApiService api(engine);
  api.post_logs(r1_batch());
  const char* q = R"({"question":"Were all the waypoints received successfully reached?","k":8})";
  auto a = api.post_query(q);
  auto b = api.post_query(q);
  EXPECT_EQ(strip_timings(json::parse(a.body)), strip_timings(json::parse(b.body)));
}

TEST(PostQuery, BadRequests) {
  Engine engine{Config{}};
  ApiService api(engine);
  api.post_logs(batch({"A"}));
  for (const char* body : {
           R"({"question":""})",
           R"({"question":"   "})",
           R"({"question":5})",
           R"({})",
           R"({"question":"q","k":0})",
           R"({"question":"q","k":-2})",
           R"({"question":"q","k":1.5})",
           R"({"question":"q","lambda":1.5})",
           R"({"question":"q","lambda":-0.1})",
           R"({"question":"q","lambda":"high"})",
           "nope",
       }) {
    auto r = api.post_query(body);
    EXPECT_EQ(r.status, 400) << body;
  }
}

TEST(PostQuery, BackendDownReturnsContext) {
  Engine engine{Config{}, nullptr, std::make_unique<DownBackend>()};
  ApiService api(engine);
  api.post_logs(batch({"Navigation to the waypoint with ID: 9 has aborted"}));
  auto r = api.post_query(R"({"question":"What happened to waypoint 9?"})");
  EXPECT_EQ(r.status, 502);
  auto doc = json::parse(r.body);
  EXPECT_EQ(doc["error"]["code"], "BACKEND_UNAVAILABLE");
  EXPECT_FALSE(doc.contains("answer"));
  ASSERT_EQ(doc["context"].size(), 1u);
  EXPECT_EQ(doc["context"][0]["msg"], "Navigation to the waypoint with ID: 9 has aborted");
}

TEST(PostQuery, OverflowIs400) {
  Config cfg;
  cfg.backend.n_ctx = 8;
  Engine engine{cfg};
  ApiService api(engine);
  api.post_logs(batch({"a log line"}));
  auto r = api.post_query(R"({"question":"q"})");
  EXPECT_EQ(r.status, 400);
  EXPECT_TRUE(json::parse(r.body).contains("context"));
}

TEST(Report, ConservationAcrossBatches) {
  Engine engine{Config{}};
  ApiService api(engine);
  EXPECT_EQ(json::parse(api.get_report().body)["ingest"]["received"], 0);
  std::uint64_t received = 0, accepted = 0;
  for (auto b : {batch({"A", "A"}), batch({"A", "B"}), batch({"B", "C", "C"})}) {
    auto doc = json::parse(api.post_logs(b).body);
    received += doc["received"].get<std::uint64_t>();
    accepted += doc["accepted"].get<std::uint64_t>();
  }
  engine.wait_drained();
  auto report = json::parse(api.get_report().body);
  EXPECT_EQ(report["ingest"]["received"], received);
  EXPECT_EQ(report["ingest"]["processed"], accepted);
  EXPECT_EQ(report["ingest"]["deduplicated"], received - accepted);
  api.post_query(R"({"question":"q"})");
  EXPECT_EQ(json::parse(api.get_report().body)["questions"].size(), 1u);
}

TEST(Reset, ZeroesReport) {
  Engine engine{Config{}};
  ApiService api(engine);
  api.post_logs(batch({"A", "B"}));
  api.post_query(R"({"question":"q"})");
  auto r = api.post_reset();
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(json::parse(r.body), json::parse(R"({"ok":true})"));
  auto report = json::parse(api.get_report().body);
  EXPECT_EQ(report["ingest"]["received"], 0);
  EXPECT_TRUE(report["questions"].empty());
  EXPECT_EQ(api.post_query(R"({"question":"q"})").status, 409);
}

TEST(Health, MockAndDeadBackend) {
  Engine mock{Config{}};
  EXPECT_EQ(json::parse(ApiService(mock).get_health().body), json::parse(R"({"ok":true,"backend_ok":true})"));
  Config cfg;
  cfg.backend.kind = BackendKind::kHttp;
  cfg.backend.endpoint_url = "http://127.0.0.1:1";
  cfg.backend.timeout_s = 1;
  Engine dead{cfg};
  EXPECT_EQ(json::parse(ApiService(dead).get_health().body), json::parse(R"({"ok":true,"backend_ok":false})"));
}

TEST(Concurrency, LogsAndQueriesInterleave) {
  Engine engine{Config{}};
  ApiService api(engine);
  api.post_logs(batch({"seed"}));
  std::thread writer([&] {
    for (int i = 0; i < 100; ++i) {
      json records = json::array();
      for (int j = 0; j < 20; ++j) records.push_back({{"ts", i * 20 + j}, {"msg", "m" + std::to_string(j % 7)}});
      ASSERT_EQ(api.post_logs(json{{"records", records}}.dump()).status, 200);
    }
  });
  for (int i = 0; i < 20; ++i) {
    ASSERT_EQ(api.post_query(R"({"question":"m3","k":4})").status, 200);
    auto report = json::parse(api.get_report().body);
    const auto& in = report["ingest"];
    ASSERT_EQ(in["received"].get<std::uint64_t>(), in["deduplicated"].get<std::uint64_t>() +
                                                       in["processed"].get<std::uint64_t>() +
                                                       in["queue_depth"].get<std::uint64_t>());
  }
  writer.join();
  engine.wait_drained();
  EXPECT_EQ(engine.ingest_stats().received, 2001u);
  EXPECT_EQ(engine.store().size(), engine.ingest_stats().processed);
}

class ServerTest : public testing::Test {
 protected:
  void SetUp() override {
    port_ = server_.bind("127.0.0.1", 0);
    server_.start();
  }
  httplib::Client client() { return httplib::Client("127.0.0.1", port_); }

  Engine engine_{Config{}};
  ApiServer server_{engine_, ServiceOptions{{"http://ui.example"}, ""}};
  int port_ = 0;
};

TEST_F(ServerTest, EndpointsOverHttp) {
  auto c = client();
  auto health = c.Get("/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(c.Post("/v1/query", R"({"question":"q"})", "application/json")->status, 409);
  EXPECT_EQ(c.Post("/v1/logs", R"({"records":[{"msg":"x"}]})", "application/json")->status, 400);
  EXPECT_EQ(c.Post("/v1/logs", batch({"A", "A"}), "application/json")->status, 200);
  EXPECT_EQ(c.Post("/v1/query", R"({"question":"q","lambda":1.5})", "application/json")->status, 400);
  auto q = c.Post("/v1/query", R"({"question":"q"})", "application/json");
  EXPECT_EQ(q->status, 200);
  EXPECT_EQ(q->get_header_value("Content-Type"), "application/json");
  EXPECT_EQ(c.Get("/v1/report")->status, 200);
  EXPECT_EQ(c.Post("/v1/reset", "", "application/json")->status, 200);
  EXPECT_EQ(c.Get("/v1/nothing")->status, 404);
}

TEST_F(ServerTest, CorsAllowlist) {
  auto c = client();
  auto ok = c.Get("/v1/health", {{"Origin", "http://ui.example"}});
  EXPECT_EQ(ok->get_header_value("Access-Control-Allow-Origin"), "http://ui.example");
  auto other = c.Get("/v1/health", {{"Origin", "http://evil.example"}});
  EXPECT_FALSE(other->has_header("Access-Control-Allow-Origin"));
  auto pre = c.Options("/v1/query", {{"Origin", "http://ui.example"}});
  EXPECT_EQ(pre->status, 204);
}

TEST_F(ServerTest, BusyPortRejected) {
  Engine other{Config{}};
  ApiServer second(other);
  try {
    second.bind("127.0.0.1", port_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}
