#include "explainer/scenario_sim.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "explainer/engine.hpp"
#include "explainer/error.hpp"

namespace explainer {

namespace {

constexpr std::string_view kNavigationNode = "waypoint_navigation";
constexpr std::string_view kController = "controller_server";
constexpr std::string_view kPlanner = "planner_server";
constexpr std::string_view kNavigator = "bt_navigator";

/// mt19937_64 is specified bit-exactly; the std distributions are not, so
/// values are derived from raw draws here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
  }

  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {  // inclusive
    return lo + engine_() % (hi - lo + 1);
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t run_salt(Run run) { return 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(run) + 1); }

class TraceBuilder {
 public:
  TraceBuilder(const ScenarioSpec& spec) : spec_(spec), rng_(spec.seed ^ run_salt(spec.run)) {
    now_ = spec.base_timestamp;
  }

  void emit(std::string message, std::string_view source, LogLevel level = LogLevel::kInfo) {
    if (!records_.empty()) now_ += rng_.between(50, 500) * 1'000'000ULL;
    LogRecord r;
    r.timestamp = now_;
    r.message = std::move(message);
    r.source = std::string(source);
    r.level = level;
    records_.push_back(std::move(r));
  }

  void noise_burst() {
    for (std::size_t i = 0; i < spec_.noise_repeat; ++i) emit(std::string(messages::kPassingPath), kController);
  }

  void begin_navigating() {
    double x0 = pos_x_, y0 = pos_y_;
    pos_x_ = round2(rng_.uniform(-35.0, 20.0));
    pos_y_ = round2(rng_.uniform(-35.0, 20.0));
    emit(fmt::format("Begin navigating from current location ({:.2f}, {:.2f}) to ({:.2f}, {:.2f})", x0, y0, pos_x_,
                     pos_y_),
         kNavigator);
  }

  void obstacle(int id, double from, double to) {
    emit(fmt::format("Obstacle detected during navigation to waypoint with ID:{} - Distance to the point increased "
                     "from: {:.2f} meters to {:.2f} meters",
                     id, from, to),
         kNavigationNode, LogLevel::kWarn);
  }

  /// Small (R2) or large (R3/R4) distance jump.
  std::pair<double, double> obstacle_distances(bool large) {
    double from = large ? rng_.uniform(1.0, 6.0) : rng_.uniform(0.05, 0.20);
    double delta = large ? rng_.uniform(1.0, 15.0) : rng_.uniform(0.05, 0.20);
    return {from, from + delta};
  }

  void planning_failed() {
    emit(fmt::format("GridBased planning failed to create a plan to ({:.2f}, {:.2f})", pos_x_, pos_y_), kPlanner,
         LogLevel::kWarn);
  }

  std::vector<LogRecord> take() {
    for (std::size_t i = 0; i < records_.size(); ++i) records_[i].seq = i + 1;
    return std::move(records_);
  }
  Rng& rng() { return rng_; }
  bool goal_checker_warned = false;

 private:
  static double round2(double v) { return std::round(v * 100.0) / 100.0; }

  const ScenarioSpec& spec_;
  Rng rng_;
  TimestampNs now_ = 0;
  double pos_x_ = 0.0;
  double pos_y_ = 10.0;
  std::vector<LogRecord> records_;
};

std::string waypoint_list(const std::vector<int>& ids) {
  std::string out = "The waypoints received are:";
  for (int id : ids) out += " " + std::to_string(id);
  return out;
}

}  // namespace

std::string_view to_string(Run run) noexcept {
  switch (run) {
    case Run::kR1: return "R1";
    case Run::kR2: return "R2";
    case Run::kR3: return "R3";
    case Run::kR4: return "R4";
    case Run::kR5: return "R5";
  }
  return "R1";
}

std::optional<Run> parse_run(std::string_view text) noexcept {
  if (text == "R1" || text == "r1") return Run::kR1;
  if (text == "R2" || text == "r2") return Run::kR2;
  if (text == "R3" || text == "r3") return Run::kR3;
  if (text == "R4" || text == "r4") return Run::kR4;
  if (text == "R5" || text == "r5") return Run::kR5;
  return std::nullopt;
}

void ScenarioSpec::validate() const {
  if (waypoints.empty()) throw Error(ErrorCode::kInvalidArgument, "scenario needs at least one waypoint");
}

LogCorpus generate(const ScenarioSpec& spec) {
  spec.validate();
  TraceBuilder t(spec);
  const auto& ids = spec.waypoints;
  // The waypoint that gets obstacles in R4 and the blocked one in R5.
  const std::size_t replan_index = ids.size() > 1 ? 1 : 0;

  t.emit(std::string(messages::kListReceived), kNavigationNode);
  t.emit(waypoint_list(ids), kNavigationNode);

  for (std::size_t i = 0; i < ids.size(); ++i) {
    const int id = ids[i];
    t.emit(fmt::format("Waypoint with ID: {} has been received", id), kNavigationNode);
    t.emit(fmt::format("Navigating to the waypoint with ID:{}", id), kNavigationNode);
    t.begin_navigating();
    t.emit(std::string(messages::kReceivedGoal), kController);
    if (!t.goal_checker_warned) {
      t.emit(std::string(messages::kGoalCheckerWarning), kController, LogLevel::kWarn);
      t.goal_checker_warned = true;
    }
    t.emit(fmt::format("Navigation to the waypoint with ID: {} is in progress.", id), kNavigationNode);
    t.noise_burst();

    if (spec.run == Run::kR5 && i == 0) {
      // Blocked with no alternative route: retries keep failing until abort.
      auto attempts = t.rng().between(3, 5);
      auto [from, to] = t.obstacle_distances(true);
      for (std::uint64_t a = 0; a < attempts; ++a) {
        t.obstacle(id, from, to);
        t.planning_failed();
        t.emit(std::string(messages::kInvalidPath), kController, LogLevel::kWarn);
        t.emit(std::string(messages::kReceivedGoal), kController);
        t.noise_burst();
        from = to;
        to = from + t.rng().uniform(0.5, 3.0);
      }
      t.emit(fmt::format("Navigation to the waypoint with ID: {} has aborted", id), kNavigationNode,
             LogLevel::kError);
      t.emit(std::string(messages::kWaiting), kNavigationNode);
      return LogCorpus{std::string(to_string(spec.run)) + "-" + std::to_string(spec.seed), t.take()};
    }

    const bool small_obstacle = spec.run == Run::kR2 && i >= replan_index;
    const bool large_obstacle = spec.run == Run::kR3 && i >= replan_index;
    const bool blockage = spec.run == Run::kR4 && i == replan_index;
    if (small_obstacle || large_obstacle) {
      auto [from, to] = t.obstacle_distances(large_obstacle);
      t.obstacle(id, from, to);
      t.begin_navigating();
      t.emit(std::string(messages::kReceivedGoal), kController);
      t.noise_burst();
    } else if (blockage) {
      auto [from, to] = t.obstacle_distances(true);
      t.obstacle(id, from, to);
      t.emit(std::string(messages::kInvalidPath), kController, LogLevel::kWarn);
      t.planning_failed();
      t.emit(std::string(messages::kReceivedGoal), kController);
      t.noise_burst();
      t.obstacle(id, to, to + t.rng().uniform(0.5, 3.0));
      t.begin_navigating();
      t.emit(std::string(messages::kReceivedGoal), kController);
      t.noise_burst();
    }

    t.emit(fmt::format("Navigation to the waypoint with ID: {} has succeeded.", id), kNavigationNode);
    t.emit(std::string(messages::kWaiting), kNavigationNode);
  }
  t.emit(std::string(messages::kTaskCompleted), kNavigationNode);
  return LogCorpus{std::string(to_string(spec.run)) + "-" + std::to_string(spec.seed), t.take()};
}

bool has_completion_line(const LogCorpus& corpus) {
  for (const auto& r : corpus.records) {
    if (r.message == messages::kTaskCompleted) return true;
  }
  return false;
}

double replay(const LogCorpus& corpus, Engine& engine, std::optional<double> rate_per_s) {
  if (rate_per_s && !(*rate_per_s > 0)) throw Error(ErrorCode::kInvalidArgument, "replay rate must be > 0");
  using Clock = std::chrono::steady_clock;
  auto start = Clock::now();
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    if (rate_per_s) {
      auto due = start + std::chrono::duration_cast<Clock::duration>(
                             std::chrono::duration<double>(static_cast<double>(i) / *rate_per_s));
      std::this_thread::sleep_until(due);
    }
    engine.ingest_record(corpus.records[i]);
  }
  if (rate_per_s && !corpus.records.empty()) {
    // The last record still occupies one inter-arrival slot.
    std::this_thread::sleep_until(start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(
                                              static_cast<double>(corpus.records.size()) / *rate_per_s)));
  }
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace explainer
