#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace explainer {

enum class LogLevel { kDebug, kInfo, kWarn, kError, kFatal };

std::string_view to_string(LogLevel level) noexcept;
std::optional<LogLevel> parse_level(std::string_view text) noexcept;

/// Nanoseconds since the Unix epoch.
using TimestampNs = std::uint64_t;

/// One log event: a timestamp and a message, plus the middleware metadata
/// that travels with it. `seq` is assigned by ingestion (0 = unassigned).
struct LogRecord {
  TimestampNs timestamp = 0;
  std::string message;
  std::string source;
  LogLevel level = LogLevel::kInfo;
  std::uint64_t seq = 0;

  /// Equality on the serialized fields only (seq is session-local).
  bool same_content(const LogRecord& other) const noexcept {
    return timestamp == other.timestamp && message == other.message &&
           source == other.source && level == other.level;
  }

  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

struct LogCorpus {
  std::string session_id;
  std::vector<LogRecord> records;  // seq ascending
};

/// Parses one JSON Lines record: {"ts":<int ns>,"msg":"...","src":"...","lvl":"..."}.
/// `src` and `lvl` are optional; unknown keys are ignored. Throws Error with
/// kMalformedLine, kEmptyMessage or kUnknownLevel. Never crashes on garbage.
LogRecord parse_log_line(std::string_view line);

/// Serializes with the fixed key order ts, msg, src, lvl and no trailing newline.
std::string write_log_line(const LogRecord& record);

/// Reads a whole JSONL document; blank lines are skipped. The error message
/// carries the 1-based line number of the first bad line.
std::vector<LogRecord> parse_log_lines(std::string_view text);
std::vector<LogRecord> read_log_file(const std::string& path);
void write_log_file(const std::string& path, const std::vector<LogRecord>& records);

/// Strips trailing ASCII whitespace.
std::string_view trim_right(std::string_view text) noexcept;
/// Strips leading and trailing ASCII whitespace.
std::string_view trim(std::string_view text) noexcept;

}  // namespace explainer
