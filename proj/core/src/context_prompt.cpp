#include "explainer/context_prompt.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "explainer/error.hpp"

namespace explainer {

namespace {

constexpr std::string_view kLogsPlaceholder = "{logs}";
constexpr std::string_view kQuestionPlaceholder = "{question}";

std::size_t find_unique(const std::string& text, std::string_view needle, const std::string& id) {
  auto pos = text.find(needle);
  if (pos == std::string::npos) {
    throw Error(ErrorCode::kInvalidTemplate, "template '" + id + "' lacks " + std::string(needle));
  }
  if (text.find(needle, pos + 1) != std::string::npos) {
    throw Error(ErrorCode::kInvalidTemplate, "template '" + id + "' repeats " + std::string(needle));
  }
  return pos;
}

}  // namespace

std::string format_iso8601_ms(TimestampNs ts) {
  auto seconds = static_cast<std::time_t>(ts / 1'000'000'000ULL);
  auto millis = (ts / 1'000'000ULL) % 1000ULL;
  return fmt::format("{:%Y-%m-%dT%H:%M:%S}.{:03d}Z", fmt::gmtime(seconds), millis);
}

std::string render_context_line(const LogRecord& record) {
  return "[" + format_iso8601_ms(record.timestamp) + "] " + record.message;
}

ContextSet order_context(std::vector<EmbeddedEntry> entries) {
  if (entries.empty()) throw Error(ErrorCode::kEmptyContext, "no context entries");
  std::stable_sort(entries.begin(), entries.end(), [](const EmbeddedEntry& a, const EmbeddedEntry& b) {
    if (a.record.timestamp != b.record.timestamp) return a.record.timestamp < b.record.timestamp;
    return a.record.seq < b.record.seq;
  });
  ContextSet out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i > 0) out.rendered.push_back('\n');
    out.rendered += render_context_line(entries[i].record);
  }
  out.entries = std::move(entries);
  return out;
}

PromptTemplate::PromptTemplate(std::string id, std::string text) : id_(std::move(id)), text_(std::move(text)) {
  logs_pos_ = find_unique(text_, kLogsPlaceholder, id_);
  question_pos_ = find_unique(text_, kQuestionPlaceholder, id_);
}

std::string PromptTemplate::render(std::string_view logs, std::string_view question) const {
  struct Slot {
    std::size_t pos;
    std::size_t len;
    std::string_view value;
  };
  Slot first{logs_pos_, kLogsPlaceholder.size(), logs};
  Slot second{question_pos_, kQuestionPlaceholder.size(), question};
  if (second.pos < first.pos) std::swap(first, second);

  std::string out;
  out.reserve(text_.size() + logs.size() + question.size());
  out.append(text_, 0, first.pos);
  out.append(first.value);
  out.append(text_, first.pos + first.len, second.pos - first.pos - first.len);
  out.append(second.value);
  out.append(text_, second.pos + second.len);
  return out;
}

TemplateRegistry TemplateRegistry::from_directory(const std::filesystem::path& dir) {
  TemplateRegistry registry;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::kTemplateNotFound, "template directory '" + dir.string() + "' not found");
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot read template '" + entry.path().string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    registry.add(PromptTemplate(entry.path().stem().string(), buf.str()));
  }
  return registry;
}

std::filesystem::path TemplateRegistry::builtin_directory() {
  if (const char* env = std::getenv("EXPLAINER_TEMPLATE_DIR"); env && *env) return env;
  std::error_code ec;
  if (std::filesystem::is_directory(EXPLAINER_TEMPLATE_BUILD_DIR, ec)) return EXPLAINER_TEMPLATE_BUILD_DIR;
  return EXPLAINER_TEMPLATE_INSTALL_DIR;
}

TemplateRegistry TemplateRegistry::builtin() { return from_directory(builtin_directory()); }

void TemplateRegistry::add(PromptTemplate tmpl) {
  auto id = tmpl.id();
  templates_.insert_or_assign(std::move(id), std::move(tmpl));
}

const PromptTemplate& TemplateRegistry::get(std::string_view id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) {
    throw Error(ErrorCode::kTemplateNotFound, "unknown template '" + std::string(id) + "'");
  }
  return it->second;
}

bool TemplateRegistry::contains(std::string_view id) const { return templates_.find(id) != templates_.end(); }

std::vector<std::string> TemplateRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : templates_) out.push_back(id);
  return out;
}

PromptBundle build_prompt(const PromptTemplate& tmpl, ContextSet context, std::string question) {
  if (trim(question).empty()) throw Error(ErrorCode::kEmptyQuestion, "question is empty");
  if (context.entries.empty()) throw Error(ErrorCode::kEmptyContext, "no context entries");
  PromptBundle bundle;
  bundle.template_id = tmpl.id();
  bundle.prompt_text = tmpl.render(context.rendered, question);
  bundle.context = std::move(context);
  bundle.question = std::move(question);
  return bundle;
}

PromptBundle build_prompt(const TemplateRegistry& registry, std::string_view template_id, ContextSet context,
                          std::string question) {
  return build_prompt(registry.get(template_id), std::move(context), std::move(question));
}

}  // namespace explainer
