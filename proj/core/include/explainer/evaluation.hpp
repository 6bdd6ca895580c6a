#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "explainer/config.hpp"
#include "explainer/engine.hpp"
#include "explainer/scenario_sim.hpp"

namespace explainer {

struct LabeledQuestion {
  std::string label;
  std::string text;
};

/// The eight canonical user questions. "ID X" is instantiated with the
/// waypoint each run is probed on: ID 6 for R1-R4 (where obstacles and
/// replanning show up), ID 9 for R5 (the aborted one).
std::vector<LabeledQuestion> default_questions(Run run);

/// Adds the other-ID variants of UQ4 and UQ5 (labelled "UQ4b", "UQ5b").
std::vector<LabeledQuestion> default_questions_with_variants(Run run);

/// One question per non-blank line, labelled Q1, Q2, ...
std::vector<LabeledQuestion> read_questions_file(const std::string& path);

struct EvalOptions {
  Run run = Run::kR1;
  std::uint64_t seed = 7;
  std::size_t noise_repeat = 20;
  std::optional<std::vector<LabeledQuestion>> questions;  // defaults when unset
  bool both_id_variants = false;
  int retries = 2;                          // extra attempts per question on backend failure
  std::optional<double> replay_rate;        // records/s; unset = as fast as possible
};

struct EvalOutcome {
  SessionReport report;
  LogCorpus corpus;
  bool backend_failed = false;  // some question never got an answer
};

/// generate -> replay -> drain -> ask every question. Backend failures are
/// retried, then recorded as context-only entries.
EvalOutcome run_evaluation(const Config& config, const EvalOptions& options);
/// Same, on a caller-provided engine (reset first).
EvalOutcome run_evaluation(Engine& engine, const EvalOptions& options);

}  // namespace explainer
