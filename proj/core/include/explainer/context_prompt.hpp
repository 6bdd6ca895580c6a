#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "explainer/vector_store.hpp"

namespace explainer {

/// Retrieved entries in chronological order, plus their rendered lines.
struct ContextSet {
  std::vector<EmbeddedEntry> entries;  // sorted by (timestamp, seq)
  std::string rendered;                // one line per entry, LF-joined, no trailing LF
};

struct PromptBundle {
  std::string template_id;
  ContextSet context;
  std::string question;
  std::string prompt_text;
};

/// `2023-11-14T22:13:20.123Z`; sub-millisecond digits are truncated.
std::string format_iso8601_ms(TimestampNs ts);

/// `[<iso timestamp>] <message>`
std::string render_context_line(const LogRecord& record);

/// Stable sort by timestamp, then seq. Throws kEmptyContext on empty input.
ContextSet order_context(std::vector<EmbeddedEntry> entries);

/// A prompt template: UTF-8 text containing `{logs}` and `{question}`
/// exactly once each.
class PromptTemplate {
 public:
  /// Throws kInvalidTemplate when a placeholder is missing or repeated.
  PromptTemplate(std::string id, std::string text);

  const std::string& id() const noexcept { return id_; }
  const std::string& text() const noexcept { return text_; }

  /// Single-pass substitution, so placeholder-like text inside the logs or
  /// the question is never expanded.
  std::string render(std::string_view logs, std::string_view question) const;

 private:
  std::string id_;
  std::string text_;
  std::size_t logs_pos_ = 0;
  std::size_t question_pos_ = 0;
};

/// Template assets keyed by id. Files named `<id>.txt` in a directory.
class TemplateRegistry {
 public:
  TemplateRegistry() = default;

  /// Loads every `*.txt` file in `dir`.
  static TemplateRegistry from_directory(const std::filesystem::path& dir);
  /// The registry shipped with the library (source tree, then install prefix).
  /// Honors EXPLAINER_TEMPLATE_DIR when set.
  static TemplateRegistry builtin();
  static std::filesystem::path builtin_directory();

  void add(PromptTemplate tmpl);
  const PromptTemplate& get(std::string_view id) const;  // throws kTemplateNotFound
  bool contains(std::string_view id) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

inline constexpr std::string_view kDefaultTemplateId = "default";

/// Substitutes the rendered context and question into the template.
/// Throws kEmptyQuestion or kEmptyContext.
PromptBundle build_prompt(const PromptTemplate& tmpl, ContextSet context, std::string question);
PromptBundle build_prompt(const TemplateRegistry& registry, std::string_view template_id, ContextSet context,
                          std::string question);

}  // namespace explainer
