#include "http_util.hpp"

#include <cmath>

#include "httplib.h"

namespace explainer::detail {

SplitUrl split_url(std::string_view url) {
  SplitUrl out;
  auto scheme_end = url.find("://");
  std::size_t host_start = scheme_end == std::string_view::npos ? 0 : scheme_end + 3;
  auto slash = url.find('/', host_start);
  if (slash == std::string_view::npos) {
    out.origin = std::string(url);
  } else {
    out.origin = std::string(url.substr(0, slash));
    out.path = std::string(url.substr(slash));
  }
  if (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

std::string join_path(std::string_view base, std::string_view suffix) {
  std::string out(base);
  while (!out.empty() && out.back() == '/') out.pop_back();
  if (suffix.empty() || suffix.front() != '/') out.push_back('/');
  out.append(suffix);
  return out;
}

namespace {

void apply_timeout(httplib::Client& client, double timeout_s) {
  if (!(timeout_s > 0)) timeout_s = 0.001;
  auto sec = static_cast<time_t>(std::floor(timeout_s));
  auto usec = static_cast<time_t>(std::llround((timeout_s - static_cast<double>(sec)) * 1e6));
  if (sec == 0 && usec == 0) usec = 1;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
}

HttpResponse convert(const httplib::Result& result) {
  HttpResponse out;
  if (!result) {
    auto err = result.error();
    out.failure = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read)
                      ? HttpFailure::kTimeout
                      : HttpFailure::kConnection;
    out.error = httplib::to_string(err);
    return out;
  }
  out.status = result->status;
  out.body = result->body;
  if (result->status < 200 || result->status >= 300) {
    out.failure = HttpFailure::kStatus;
    out.error = "HTTP status " + std::to_string(result->status);
  }
  return out;
}

}  // namespace

HttpResponse post_json(std::string_view url, const std::string& body, double timeout_s) {
  auto parts = split_url(url);
  httplib::Client client(parts.origin);
  if (!client.is_valid()) {
    return {HttpFailure::kConnection, 0, {}, "invalid URL '" + std::string(url) + "'"};
  }
  apply_timeout(client, timeout_s);
  auto path = parts.path.empty() ? std::string("/") : parts.path;
  return convert(client.Post(path, body, "application/json"));
}

HttpResponse get(std::string_view url, double timeout_s) {
  auto parts = split_url(url);
  httplib::Client client(parts.origin);
  if (!client.is_valid()) {
    return {HttpFailure::kConnection, 0, {}, "invalid URL '" + std::string(url) + "'"};
  }
  apply_timeout(client, timeout_s);
  auto path = parts.path.empty() ? std::string("/") : parts.path;
  return convert(client.Get(path));
}

}  // namespace explainer::detail
