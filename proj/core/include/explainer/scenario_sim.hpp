#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "explainer/log_model.hpp"

namespace explainer {

class Engine;

/// Benchmark runs: R1 no obstacles, R2 small obstacles, R3 large obstacles,
/// R4 full blockage with replanning, R5 blockage with no viable replan.
enum class Run { kR1, kR2, kR3, kR4, kR5 };

std::string_view to_string(Run run) noexcept;
std::optional<Run> parse_run(std::string_view text) noexcept;

struct ScenarioSpec {
  Run run = Run::kR1;
  std::vector<int> waypoints = {9, 6, 7};
  std::uint64_t seed = 0;
  std::size_t noise_repeat = 20;  // length of each "Passing new path to controller." burst
  TimestampNs base_timestamp = 1'700'000'000'000'000'000ULL;

  /// Throws kInvalidArgument when waypoints is empty.
  void validate() const;
};

namespace messages {
inline constexpr std::string_view kListReceived = "A list of waypoints has been received";
inline constexpr std::string_view kTaskCompleted =
    "All the waypoints received have been reached. Navigation task completed.";
inline constexpr std::string_view kWaiting = "Waiting for a new waypoint...";
inline constexpr std::string_view kPassingPath = "Passing new path to controller.";
inline constexpr std::string_view kReceivedGoal = "Received a goal, begin computing control effort.";
inline constexpr std::string_view kGoalCheckerWarning =
    "No goal checker was specified in parameter 'current_goal_checker'. Server will use only plugin loaded "
    "general_goal_checker. This warning will appear once.";
inline constexpr std::string_view kInvalidPath = "Invalid path, Path is empty.";
}  // namespace messages

/// Builds a deterministic navigation trace for (spec.run, spec.seed): the
/// enhanced waypoint-navigation grammar plus planner/controller chatter.
/// Timestamps start at base_timestamp and strictly increase by 50-500 ms.
LogCorpus generate(const ScenarioSpec& spec);

/// True when `corpus` holds the final task-completed line.
bool has_completion_line(const LogCorpus& corpus);

/// Submits every record to `engine` in order, pacing at `rate_per_s` records
/// per second when given (as fast as possible otherwise). Returns elapsed wall
/// time in seconds. Throws kSessionClosed if the engine is closed.
double replay(const LogCorpus& corpus, Engine& engine, std::optional<double> rate_per_s = std::nullopt);

}  // namespace explainer
