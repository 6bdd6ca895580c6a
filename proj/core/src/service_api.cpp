#include "explainer/service_api.hpp"

#include <sys/socket.h>

#include <algorithm>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace explainer {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string dump(const ordered_json& doc) {
  return doc.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

ordered_json error_doc(ApiErrorCode code, const std::string& message) {
  ordered_json doc;
  doc["error"] = {{"code", std::string(to_string(code))}, {"message", message}};
  return doc;
}

ApiResponse error_response(ApiErrorCode code, const std::string& message) {
  return {http_status(code), dump(error_doc(code, message))};
}

ordered_json context_json(const ContextSet& context) {
  ordered_json out = ordered_json::array();
  for (const auto& e : context.entries) {
    out.push_back({{"ts", e.record.timestamp},
                   {"ts_iso", format_iso8601_ms(e.record.timestamp)},
                   {"msg", e.record.message}});
  }
  return out;
}

LogRecord record_from_json(const json& item) {
  if (item.is_string()) return parse_log_line(item.get_ref<const std::string&>());
  if (!item.is_object()) throw Error(ErrorCode::kMalformedLine, "record must be an object");
  return parse_log_line(item.dump());
}

}  // namespace

std::string_view to_string(ApiErrorCode code) noexcept {
  switch (code) {
    case ApiErrorCode::kBadRequest: return "BAD_REQUEST";
    case ApiErrorCode::kEmptyStore: return "EMPTY_STORE";
    case ApiErrorCode::kBackendUnavailable: return "BACKEND_UNAVAILABLE";
    case ApiErrorCode::kInternal: return "INTERNAL";
  }
  return "INTERNAL";
}

int http_status(ApiErrorCode code) noexcept {
  switch (code) {
    case ApiErrorCode::kBadRequest: return 400;
    case ApiErrorCode::kEmptyStore: return 409;
    case ApiErrorCode::kBackendUnavailable: return 502;
    case ApiErrorCode::kInternal: return 500;
  }
  return 500;
}

ApiService::ApiService(Engine& engine) : engine_(engine) {}

ApiResponse ApiService::post_logs(std::string_view body) {
  auto doc = json::parse(body.begin(), body.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    return error_response(ApiErrorCode::kBadRequest, "body must be a JSON object");
  }
  auto records_it = doc.find("records");
  if (records_it == doc.end() || !records_it->is_array()) {
    return error_response(ApiErrorCode::kBadRequest, "'records' must be an array");
  }

  // Validate the whole batch before touching the engine.
  std::vector<LogRecord> batch;
  batch.reserve(records_it->size());
  for (std::size_t i = 0; i < records_it->size(); ++i) {
    try {
      batch.push_back(record_from_json((*records_it)[i]));
    } catch (const Error& e) {
      return error_response(ApiErrorCode::kBadRequest,
                            "record " + std::to_string(i) + ": " + std::string(to_string(e.code())) + ": " +
                                e.what());
    }
  }

  std::size_t accepted = 0;
  try {
    std::lock_guard lock(ingest_mu_);
    for (auto& r : batch) accepted += engine_.ingest_record(std::move(r)) ? 1 : 0;
  } catch (const Error& e) {
    return error_response(ApiErrorCode::kInternal, e.what());
  }
  ordered_json out;
  out["received"] = batch.size();
  out["accepted"] = accepted;
  out["deduplicated"] = batch.size() - accepted;
  return {200, dump(out)};
}

ApiResponse ApiService::post_query(std::string_view body) {
  auto doc = json::parse(body.begin(), body.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    return error_response(ApiErrorCode::kBadRequest, "body must be a JSON object");
  }
  auto q = doc.find("question");
  if (q == doc.end() || !q->is_string() || trim(q->get_ref<const std::string&>()).empty()) {
    return error_response(ApiErrorCode::kBadRequest, "'question' must be a non-empty string");
  }
  RetrievalParams params = engine_.config().retrieval;
  if (auto k = doc.find("k"); k != doc.end() && !k->is_null()) {
    if (!k->is_number_integer() || k->get<long long>() < 1) {
      return error_response(ApiErrorCode::kBadRequest, "'k' must be an integer >= 1");
    }
    params.k = k->get<std::size_t>();
  }
  if (auto l = doc.find("lambda"); l != doc.end() && !l->is_null()) {
    if (!l->is_number()) return error_response(ApiErrorCode::kBadRequest, "'lambda' must be a number");
    double lambda = l->get<double>();
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
      return error_response(ApiErrorCode::kBadRequest, "'lambda' must be in [0, 1]");
    }
    params.lambda = lambda;
  }

  try {
    AskOptions ask;
    ask.params = params;
    auto result = engine_.ask(q->get<std::string>(), std::move(ask));
    ordered_json out;
    out["answer"] = result.answer;
    out["context"] = context_json(result.context);
    out["question_time_s"] = result.question_time_s;
    out["backend_latency_s"] = result.backend_latency_s;
    return {200, dump(out)};
  } catch (const AskError& e) {
    auto code = e.code() == ErrorCode::kContextOverflow ? ApiErrorCode::kBadRequest
                                                        : ApiErrorCode::kBackendUnavailable;
    auto doc_out = error_doc(code, e.what());
    doc_out["context"] = context_json(e.partial().context);
    doc_out["question_time_s"] = e.partial().question_time_s;
    return {http_status(code), dump(doc_out)};
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::kEmptyStore: return error_response(ApiErrorCode::kEmptyStore, e.what());
      case ErrorCode::kEmptyQuestion:
      case ErrorCode::kInvalidArgument: return error_response(ApiErrorCode::kBadRequest, e.what());
      case ErrorCode::kEmbedderFailure:
      case ErrorCode::kRemoteUnavailable: return error_response(ApiErrorCode::kBackendUnavailable, e.what());
      default: return error_response(ApiErrorCode::kInternal, e.what());
    }
  } catch (const std::exception& e) {
    return error_response(ApiErrorCode::kInternal, e.what());
  }
}

ApiResponse ApiService::get_report() {
  auto report = engine_.report();
  return {200, report_to_json(report)};
}

ApiResponse ApiService::post_reset() {
  std::lock_guard lock(ingest_mu_);
  engine_.reset();
  return {200, R"({"ok":true})"};
}

ApiResponse ApiService::get_health() {
  ordered_json out;
  out["ok"] = true;
  out["backend_ok"] = engine_.backend_healthy();
  return {200, dump(out)};
}

struct ApiServer::Impl {
  Impl(Engine& engine, ServiceOptions opts) : service(engine), options(std::move(opts)) {}

  ApiService service;
  ServiceOptions options;
  httplib::Server server;
  std::thread thread;
  bool bound = false;
};

ApiServer::ApiServer(Engine& engine, ServiceOptions options)
    : impl_(std::make_unique<Impl>(engine, std::move(options))) {
  auto& server = impl_->server;
  auto& service = impl_->service;

  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });

  auto origins = impl_->options.cors_origins;
  server.set_post_routing_handler([origins](const httplib::Request& req, httplib::Response& res) {
    bool any = std::find(origins.begin(), origins.end(), "*") != origins.end();
    auto origin = req.get_header_value("Origin");
    if (any) {
      res.set_header("Access-Control-Allow-Origin", "*");
    } else if (!origin.empty() && std::find(origins.begin(), origins.end(), origin) != origins.end()) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
    }
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
  server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  auto send = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.Post("/v1/logs", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.post_logs(req.body));
  });
  server.Post("/v1/query", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.post_query(req.body));
  });
  server.Get("/v1/report",
             [&service, send](const httplib::Request&, httplib::Response& res) { send(res, service.get_report()); });
  server.Post("/v1/reset",
              [&service, send](const httplib::Request&, httplib::Response& res) { send(res, service.post_reset()); });
  server.Get("/v1/health",
             [&service, send](const httplib::Request&, httplib::Response& res) { send(res, service.get_health()); });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(dump(error_doc(ApiErrorCode::kInternal, what)), "application/json");
  });
  if (!impl_->options.static_dir.empty()) server.set_mount_point("/", impl_->options.static_dir);
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host + " on any port");
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port) + " (address in use?)");
  }
  impl_->bound = true;
  return bound;
}

void ApiServer::listen() {
  if (!impl_->bound) throw Error(ErrorCode::kInvalidArgument, "ApiServer::listen called before bind");
  impl_->server.listen_after_bind();
}

void ApiServer::start() {
  if (!impl_->bound) throw Error(ErrorCode::kInvalidArgument, "ApiServer::start called before bind");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void ApiServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void ApiServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace explainer
