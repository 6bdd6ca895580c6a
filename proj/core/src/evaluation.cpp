#include "explainer/evaluation.hpp"

#include <fstream>

#include "explainer/error.hpp"

namespace explainer {

namespace {

const char* const kUq[] = {
    "How many waypoints were received during the navigation task?",
    "Which were the IDs of the waypoints received during the navigation task?",
    "Were all the waypoints received successfully reached?",
    "What happened during navigation to waypoint with ID X?",
    "Why was the route replanned during navigation to waypoint with ID X?",
    "Have any relevant events occurred during navigation?",
    "What is the task that the robot had to perform?",
    "Did the robot avoid any obstacles during the navigation?",
};

int probe_id(Run run) { return run == Run::kR5 ? 9 : 6; }
int other_id(Run run) { return run == Run::kR5 ? 6 : 9; }

std::string instantiate(std::string text, int id) {
  auto pos = text.find("ID X");
  if (pos != std::string::npos) text.replace(pos, 4, "ID " + std::to_string(id));
  return text;
}

}  // namespace

std::vector<LabeledQuestion> default_questions(Run run) {
  std::vector<LabeledQuestion> out;
  for (int i = 0; i < 8; ++i) {
    out.push_back({"UQ" + std::to_string(i + 1), instantiate(kUq[i], probe_id(run))});
  }
  return out;
}

std::vector<LabeledQuestion> default_questions_with_variants(Run run) {
  auto out = default_questions(run);
  out.push_back({"UQ4b", instantiate(kUq[3], other_id(run))});
  out.push_back({"UQ5b", instantiate(kUq[4], other_id(run))});
  return out;
}

std::vector<LabeledQuestion> read_questions_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open questions file '" + path + "'");
  std::vector<LabeledQuestion> out;
  std::string line;
  while (std::getline(in, line)) {
    auto text = trim(line);
    if (text.empty()) continue;
    out.push_back({"Q" + std::to_string(out.size() + 1), std::string(text)});
  }
  return out;
}

EvalOutcome run_evaluation(const Config& config, const EvalOptions& options) {
  Engine engine(config);
  return run_evaluation(engine, options);
}

EvalOutcome run_evaluation(Engine& engine, const EvalOptions& options) {
  engine.reset();
  engine.set_session_id("eval-" + std::string(to_string(options.run)) + "-seed" + std::to_string(options.seed));

  ScenarioSpec spec;
  spec.run = options.run;
  spec.seed = options.seed;
  spec.noise_repeat = options.noise_repeat;
  EvalOutcome outcome;
  outcome.corpus = generate(spec);

  double elapsed = replay(outcome.corpus, engine, options.replay_rate);
  engine.wait_drained();
  engine.set_execution_time(elapsed);
  engine.set_scenario(ScenarioSummary{std::string(to_string(options.run)), options.seed,
                                      outcome.corpus.records.size(), has_completion_line(outcome.corpus)});

  auto questions = options.questions ? *options.questions
                   : options.both_id_variants ? default_questions_with_variants(options.run)
                                              : default_questions(options.run);
  for (const auto& q : questions) {
    std::optional<ExplanationResult> final_result;
    for (int attempt = 0; attempt <= std::max(options.retries, 0); ++attempt) {
      try {
        AskOptions ask;
        ask.label = q.label;
        ask.record = false;
        final_result = engine.ask(q.text, std::move(ask));
        break;
      } catch (const AskError& e) {
        final_result = e.partial();
      }
    }
    if (!final_result->error.empty()) outcome.backend_failed = true;
    engine.record_question(std::move(*final_result));
  }
  outcome.report = engine.report();
  return outcome;
}

}  // namespace explainer
