#include "explainer/log_model.hpp"

#include <fstream>
#include <sstream>

#include "explainer/error.hpp"
#include "json.hpp"

namespace explainer {

namespace {

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

[[noreturn]] void malformed(const std::string& why) {
  throw Error(ErrorCode::kMalformedLine, "malformed log line: " + why);
}

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kEmptyMessage: return "EmptyMessage";
    case ErrorCode::kUnknownLevel: return "UnknownLevel";
    case ErrorCode::kSessionClosed: return "SessionClosed";
    case ErrorCode::kEmbedderFailure: return "EmbedderFailure";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kRemoteUnavailable: return "RemoteUnavailable";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kEmptyStore: return "EmptyStore";
    case ErrorCode::kMalformedStore: return "MalformedStore";
    case ErrorCode::kEmptyContext: return "EmptyContext";
    case ErrorCode::kEmptyQuestion: return "EmptyQuestion";
    case ErrorCode::kTemplateNotFound: return "TemplateNotFound";
    case ErrorCode::kInvalidTemplate: return "InvalidTemplate";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kContextOverflow: return "ContextOverflow";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

std::string_view to_string(LogLevel level) noexcept {
  switch (level) {
    case LogLevel::kDebug: return "DEBUG";
    case LogLevel::kInfo: return "INFO";
    case LogLevel::kWarn: return "WARN";
    case LogLevel::kError: return "ERROR";
    case LogLevel::kFatal: return "FATAL";
  }
  return "INFO";
}

std::optional<LogLevel> parse_level(std::string_view text) noexcept {
  if (text == "DEBUG") return LogLevel::kDebug;
  if (text == "INFO") return LogLevel::kInfo;
  if (text == "WARN") return LogLevel::kWarn;
  if (text == "ERROR") return LogLevel::kError;
  if (text == "FATAL") return LogLevel::kFatal;
  return std::nullopt;
}

std::string_view trim_right(std::string_view text) noexcept {
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

std::string_view trim(std::string_view text) noexcept {
  text = trim_right(text);
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  return text;
}

LogRecord parse_log_line(std::string_view line) {
  auto doc = nlohmann::json::parse(line.begin(), line.end(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) malformed("not valid JSON");
  if (!doc.is_object()) malformed("not a JSON object");

  LogRecord record;
  auto ts = doc.find("ts");
  if (ts == doc.end()) malformed("missing 'ts'");
  if (ts->is_number_unsigned()) {
    record.timestamp = ts->get<std::uint64_t>();
  } else if (ts->is_number_integer()) {
    // Signed storage only happens for negative values.
    malformed("'ts' must be a non-negative integer");
  } else {
    malformed("'ts' must be an integer");
  }

  auto msg = doc.find("msg");
  if (msg == doc.end()) malformed("missing 'msg'");
  if (!msg->is_string()) malformed("'msg' must be a string");
  record.message = msg->get<std::string>();
  if (trim(record.message).empty()) {
    throw Error(ErrorCode::kEmptyMessage, "log message is empty");
  }

  if (auto src = doc.find("src"); src != doc.end() && !src->is_null()) {
    if (!src->is_string()) malformed("'src' must be a string");
    record.source = src->get<std::string>();
  }
  if (auto lvl = doc.find("lvl"); lvl != doc.end() && !lvl->is_null()) {
    if (!lvl->is_string()) malformed("'lvl' must be a string");
    const auto& text = lvl->get_ref<const std::string&>();
    auto level = parse_level(text);
    if (!level) throw Error(ErrorCode::kUnknownLevel, "unknown log level '" + text + "'");
    record.level = *level;
  }
  return record;
}

std::string write_log_line(const LogRecord& record) {
  nlohmann::ordered_json doc;
  doc["ts"] = record.timestamp;
  doc["msg"] = record.message;
  doc["src"] = record.source;
  doc["lvl"] = std::string(to_string(record.level));
  return doc.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::vector<LogRecord> parse_log_lines(std::string_view text) {
  std::vector<LogRecord> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    try {
      out.push_back(parse_log_line(line));
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<LogRecord> read_log_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open log file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_log_lines(buf.str());
}

void write_log_file(const std::string& path, const std::vector<LogRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  for (const auto& r : records) out << write_log_line(r) << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

}  // namespace explainer
