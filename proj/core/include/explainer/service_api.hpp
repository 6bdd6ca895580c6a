#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "explainer/engine.hpp"

namespace explainer {

enum class ApiErrorCode { kBadRequest, kEmptyStore, kBackendUnavailable, kInternal };

std::string_view to_string(ApiErrorCode code) noexcept;
/// BAD_REQUEST 400, EMPTY_STORE 409, BACKEND_UNAVAILABLE 502, INTERNAL 500.
int http_status(ApiErrorCode code) noexcept;

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON
};

struct ServiceOptions {
  /// Origins allowed by CORS; "*" allows any.
  std::vector<std::string> cors_origins = {"*"};
  /// Directory served at "/" (the web client), if non-empty.
  std::string static_dir;
};

/// Transport-independent JSON handlers over one engine session.
///
///   POST /v1/logs    {"records":[{ts,msg,src?,lvl?}...]} -> {received, accepted, deduplicated}
///   POST /v1/query   {"question", "k"?, "lambda"?}      -> {answer, context, question_time_s, backend_latency_s}
///   GET  /v1/report                                     -> session report
///   POST /v1/reset                                      -> {"ok":true}
///   GET  /v1/health                                     -> {"ok":true,"backend_ok":bool}
///
/// Errors are {"error":{"code","message"}}; a 502 from /v1/query also
/// carries the retrieved "context".
class ApiService {
 public:
  explicit ApiService(Engine& engine);

  ApiResponse post_logs(std::string_view body);
  ApiResponse post_query(std::string_view body);
  ApiResponse get_report();
  ApiResponse post_reset();
  ApiResponse get_health();

 private:
  Engine& engine_;
  std::mutex ingest_mu_;  // one batch at a time keeps the single-producer contract
};

/// HTTP/1.1 server hosting an ApiService.
class ApiServer {
 public:
  ApiServer(Engine& engine, ServiceOptions options = {});
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds the listening socket; port 0 picks a free one. Returns the bound
  /// port. Throws kIo when the address is in use.
  int bind(const std::string& host, int port);
  /// Serves until stop(); requires a prior bind().
  void listen();
  /// bind() must have succeeded; serves on a background thread.
  void start();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace explainer
