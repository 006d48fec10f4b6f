#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "autostgcn/evaluator.hpp"
#include "autostgcn/objective.hpp"
#include "autostgcn/random.hpp"
#include "autostgcn/search_space.hpp"

namespace autostgcn {

struct EpsilonBreakpoint {
  int episode = 0;
  double epsilon = 0.0;
  bool operator==(const EpsilonBreakpoint&) const = default;
};

using EpsilonSchedule = std::vector<EpsilonBreakpoint>;

// Hold 0.9 for the first 10% of episodes, decay linearly to 0 by 90%, then
// hold 0.
EpsilonSchedule default_epsilon_schedule(int episodes);

// Piecewise-linear interpolation, clamped to the end values outside the
// breakpoint range. Throws EmptySchedule.
double epsilon_at(const EpsilonSchedule& schedule, int episode);

struct QLearningConfig {
  double alpha = 0.001;
  double gamma = 0.9;
  int episodes = 2000;
  // Empty means default_epsilon_schedule(episodes).
  EpsilonSchedule epsilon_schedule;
  std::uint64_t rng_seed = 0;

  EpsilonSchedule effective_schedule() const;
  void check() const;
};

/// Sparse Q(s, a) store; absent entries read as 0.
class QTable {
 public:
  using Key = std::pair<StateVector, StateVector>;

  double get(const StateVector& state, const StateVector& action) const;
  // Throws std::invalid_argument if `state` is terminal.
  void set(const StateVector& state, const StateVector& action, double value);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<Key, double>& entries() const { return entries_; }

  bool operator==(const QTable&) const = default;

 private:
  std::map<Key, double> entries_;
};

struct QCheckpoint {
  int episode = 0;  // episodes completed
  std::uint64_t rng_state_seed = 0;
  double alpha = 0.0;
  double gamma = 0.0;
  QTable table;

  // {"meta":{...},"q":{"<state>|<action>":value,...}}
  std::string to_json() const;
  static QCheckpoint from_json(std::string_view text);
};

// (1 - alpha) * q + alpha * (reward + gamma * max_next)
inline double q_update(double q, double alpha, double gamma, double reward,
                       double max_next) {
  return (1.0 - alpha) * q + alpha * (reward + gamma * max_next);
}

// Last transition of a trajectory: no bootstrap term.
inline double q_update_last(double q, double alpha, double reward) {
  return (1.0 - alpha) * q + alpha * reward;
}

// Uniform with probability epsilon, else the first maximal entry. One uniform
// draw is always consumed, plus one index draw when exploring.
std::size_t epsilon_greedy_index(std::span<const double> q, double epsilon,
                                 Rng& rng);

StateVector select_action(const StateVector& state, const QTable& table,
                          const ParameterCatalog& catalog, double epsilon,
                          Rng& rng);

ArchitectureCode sample_trajectory(const QTable& table,
                                   const ParameterCatalog& catalog,
                                   double epsilon, Rng& rng);

ArchitectureCode greedy_rollout(const QTable& table,
                                const ParameterCatalog& catalog);

using ActionFn = std::function<std::vector<StateVector>(const StateVector&)>;

// Applies the backward pass over `path` (last transition first) with the same
// per-step reward on every transition. The bootstrap max is taken over
// next_actions(s_{i+1}) with absent entries read as 0.
void backup_path(QTable& table, std::span<const StateVector> path,
                 double reward_per_step, double alpha, double gamma,
                 const ActionFn& next_actions);

// backup_path with r = return_R / transitions and catalog action spaces.
void update_trajectory(QTable& table, const ArchitectureCode& code,
                       double return_r, const QLearningConfig& cfg,
                       const ParameterCatalog& catalog);

struct EpisodeRecord {
  int episode = 0;
  double epsilon = 0.0;
  ArchitectureCode code;
  std::optional<double> mae;
  std::optional<double> inference_time;
  bool feasible = false;
  double objective = 0.0;
  double return_r = 0.0;
  bool from_cache = false;
  std::int64_t wall_time_ms = 0;

  bool ok() const { return mae.has_value(); }
  std::string to_json_line() const;
  static EpisodeRecord from_json_line(std::string_view line);

  bool operator==(const EpisodeRecord&) const = default;
};

struct BestResult {
  ArchitectureCode code;
  EvaluationResult result;
  double objective = 0.0;
  int episode = 0;
};

// Learner state carried across an interrupted run.
struct SearchState {
  int next_episode = 0;
  QTable table;
  std::optional<BestResult> best;
};

struct SearchHooks {
  std::function<void(const EpisodeRecord&)> on_episode;
  // Called with the number of completed episodes.
  std::function<void(int, const QTable&)> on_checkpoint;
  int checkpoint_every = 100;
  // Stop once this many episodes (in total) are complete; < 0 = run all.
  int stop_after = -1;
  bool record_wall_time = false;
};

struct SearchOutcome {
  std::optional<BestResult> best;
  ArchitectureCode greedy;
  QTable table;
  int episodes_completed = 0;
};

// Sequential epsilon-greedy search. Each episode draws from its own RNG
// stream derived from (rng_seed, "trajectory", episode), so a resumed run
// reproduces an uninterrupted one. EvaluatorUnavailable is rethrown after a
// checkpoint of the completed episodes.
SearchOutcome run_search(const ParameterCatalog& catalog,
                         const QLearningConfig& qcfg,
                         const ObjectiveConfig& ocfg, CachedEvaluator& evaluator,
                         const SearchHooks& hooks = {}, SearchState state = {});

// Folds one evaluated episode into `best` (lowest objective among feasible,
// successful evaluations; earliest wins ties).
void track_best(std::optional<BestResult>& best, const EpisodeRecord& record);

}  // namespace autostgcn
