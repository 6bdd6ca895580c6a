#pragma once

#include <string>
#include <string_view>

namespace explainer::detail {

/// "http://host:port/base/path" split into the httplib client origin
/// ("http://host:port") and the path ("/base/path", "" when absent).
struct SplitUrl {
  std::string origin;
  std::string path;
};

SplitUrl split_url(std::string_view url);

/// Joins `base` and `suffix` with exactly one '/' between them.
std::string join_path(std::string_view base, std::string_view suffix);

enum class HttpFailure { kNone, kConnection, kTimeout, kStatus };

struct HttpResponse {
  HttpFailure failure = HttpFailure::kNone;
  int status = 0;
  std::string body;
  std::string error;  // human-readable reason when failure != kNone
};

HttpResponse post_json(std::string_view url, const std::string& body, double timeout_s);
HttpResponse get(std::string_view url, double timeout_s);

}  // namespace explainer::detail
