#include "autostgcn/qlearning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "autostgcn/errors.hpp"

namespace autostgcn {

using nlohmann::json;

EpsilonSchedule default_epsilon_schedule(int episodes) {
  const int total = std::max(episodes, 0);
  const int hold_end = static_cast<int>(std::lround(0.1 * total));
  const int decay_end = std::max(
      hold_end, std::min(static_cast<int>(std::lround(0.9 * total)), total - 1));
  return {{0, 0.9}, {hold_end, 0.9}, {decay_end, 0.0}};
}

double epsilon_at(const EpsilonSchedule& schedule, int episode) {
  if (schedule.empty()) throw EmptySchedule("epsilon schedule has no breakpoints");
  if (episode <= schedule.front().episode) return schedule.front().epsilon;
  if (episode >= schedule.back().episode) return schedule.back().epsilon;
  for (std::size_t j = 0; j + 1 < schedule.size(); ++j) {
    const auto& a = schedule[j];
    const auto& b = schedule[j + 1];
    if (episode >= a.episode && episode < b.episode) {
      const double t = static_cast<double>(episode - a.episode) /
                       static_cast<double>(b.episode - a.episode);
      return a.epsilon + (b.epsilon - a.epsilon) * t;
    }
  }
  return schedule.back().epsilon;
}

EpsilonSchedule QLearningConfig::effective_schedule() const {
  return epsilon_schedule.empty() ? default_epsilon_schedule(episodes)
                                  : epsilon_schedule;
}

void QLearningConfig::check() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError("qlearning.alpha must lie in (0, 1]");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ConfigError("qlearning.gamma must lie in [0, 1]");
  }
  if (episodes < 0) throw ConfigError("qlearning.episodes must be >= 0");
  for (std::size_t i = 0; i < epsilon_schedule.size(); ++i) {
    const auto& b = epsilon_schedule[i];
    if (!(b.epsilon >= 0.0 && b.epsilon <= 1.0)) {
      throw ConfigError("epsilon breakpoints must lie in [0, 1]");
    }
    if (b.episode < 0) throw ConfigError("epsilon breakpoint episodes must be >= 0");
    if (i > 0 && b.episode < epsilon_schedule[i - 1].episode) {
      throw ConfigError("epsilon breakpoints must be sorted by episode");
    }
  }
}

double QTable::get(const StateVector& state, const StateVector& action) const {
  const auto it = entries_.find(Key{state, action});
  return it == entries_.end() ? 0.0 : it->second;
}

void QTable::set(const StateVector& state, const StateVector& action,
                 double value) {
  if (state.is_terminal()) {
    throw std::invalid_argument("terminal state " + state.text() +
                                " cannot key a Q entry");
  }
  entries_.insert_or_assign(Key{state, action}, value);
}

std::string QCheckpoint::to_json() const {
  json q = json::object();
  for (const auto& [key, value] : table.entries()) {
    q[key.first.text() + "|" + key.second.text()] = value;
  }
  json j;
  j["meta"] = {{"episode", episode},
               {"rng_state_seed", rng_state_seed},
               {"alpha", alpha},
               {"gamma", gamma}};
  j["q"] = std::move(q);
  return j.dump();
}

QCheckpoint QCheckpoint::from_json(std::string_view text) {
  QCheckpoint c;
  try {
    const json j = json::parse(text);
    const auto& meta = j.at("meta");
    c.episode = meta.at("episode").get<int>();
    c.rng_state_seed = meta.at("rng_state_seed").get<std::uint64_t>();
    c.alpha = meta.at("alpha").get<double>();
    c.gamma = meta.at("gamma").get<double>();
    for (const auto& [key, value] : j.at("q").items()) {
      const auto bar = key.find('|');
      if (bar == std::string::npos) {
        throw InvalidInput("checkpoint", "Q key '" + key + "' lacks '|'");
      }
      c.table.set(StateVector::parse(std::string_view(key).substr(0, bar)),
                  StateVector::parse(std::string_view(key).substr(bar + 1)),
                  value.get<double>());
    }
  } catch (const json::exception& e) {
    throw InvalidInput("checkpoint", e.what());
  } catch (const std::invalid_argument& e) {
    throw InvalidInput("checkpoint", e.what());
  }
  return c;
}

std::size_t epsilon_greedy_index(std::span<const double> q, double epsilon,
                                 Rng& rng) {
  if (q.empty()) throw std::invalid_argument("no actions to choose from");
  if (uniform_unit(rng) < epsilon) return uniform_index(rng, q.size());
  std::size_t best = 0;
  for (std::size_t i = 1; i < q.size(); ++i) {
    if (q[i] > q[best]) best = i;
  }
  return best;
}

StateVector select_action(const StateVector& state, const QTable& table,
                          const ParameterCatalog& catalog, double epsilon,
                          Rng& rng) {
  auto actions = action_space(state, catalog);
  std::vector<double> q;
  q.reserve(actions.size());
  for (const auto& a : actions) q.push_back(table.get(state, a));
  return actions[epsilon_greedy_index(q, epsilon, rng)];
}

ArchitectureCode sample_trajectory(const QTable& table,
                                   const ParameterCatalog& catalog,
                                   double epsilon, Rng& rng) {
  ArchitectureCode code;
  code.states.push_back(start_state());
  while (!code.states.back().is_terminal() &&
         code.states.back().index < catalog.max_blocks) {
    code.states.push_back(
        select_action(code.states.back(), table, catalog, epsilon, rng));
  }
  return code;
}

ArchitectureCode greedy_rollout(const QTable& table,
                                const ParameterCatalog& catalog) {
  Rng unused(0);
  return sample_trajectory(table, catalog, 0.0, unused);
}

void backup_path(QTable& table, std::span<const StateVector> path,
                 double reward_per_step, double alpha, double gamma,
                 const ActionFn& next_actions) {
  if (path.size() < 2) throw ZeroTransitions("path has no transitions");
  const std::size_t last = path.size() - 2;
  for (std::size_t i = last + 1; i-- > 0;) {
    const auto& s = path[i];
    const auto& a = path[i + 1];
    const double q = table.get(s, a);
    if (i == last) {
      table.set(s, a, q_update_last(q, alpha, reward_per_step));
      continue;
    }
    double max_next = 0.0;
    bool first = true;
    for (const auto& next : next_actions(a)) {
      const double v = table.get(a, next);
      if (first || v > max_next) max_next = v;
      first = false;
    }
    table.set(s, a, q_update(q, alpha, gamma, reward_per_step, max_next));
  }
}

void update_trajectory(QTable& table, const ArchitectureCode& code,
                       double return_r, const QLearningConfig& cfg,
                       const ParameterCatalog& catalog) {
  const auto rewards = shape_rewards(return_r, code.transitions());
  backup_path(table, code.states, rewards.front(), cfg.alpha, cfg.gamma,
              [&catalog](const StateVector& s) { return action_space(s, catalog); });
}

std::string EpisodeRecord::to_json_line() const {
  json j;
  j["episode"] = episode;
  j["epsilon"] = epsilon;
  j["code"] = code.text();
  j["mae"] = mae ? json(*mae) : json(nullptr);
  j["inference_time"] = inference_time ? json(*inference_time) : json(nullptr);
  j["feasible"] = feasible;
  j["objective"] = objective;
  j["return_R"] = return_r;
  j["from_cache"] = from_cache;
  j["wall_time_ms"] = wall_time_ms;
  return j.dump();
}

EpisodeRecord EpisodeRecord::from_json_line(std::string_view line) {
  EpisodeRecord r;
  try {
    const json j = json::parse(line);
    r.episode = j.at("episode").get<int>();
    r.epsilon = j.at("epsilon").get<double>();
    r.code = ArchitectureCode::parse(j.at("code").get<std::string>());
    if (!j.at("mae").is_null()) r.mae = j.at("mae").get<double>();
    if (!j.at("inference_time").is_null()) {
      r.inference_time = j.at("inference_time").get<double>();
    }
    r.feasible = j.at("feasible").get<bool>();
    r.objective = j.at("objective").get<double>();
    r.return_r = j.at("return_R").get<double>();
    r.from_cache = j.at("from_cache").get<bool>();
    r.wall_time_ms = j.at("wall_time_ms").get<std::int64_t>();
  } catch (const json::exception& e) {
    throw InvalidInput("episode_record", e.what());
  }
  if (r.mae.has_value() != r.inference_time.has_value()) {
    throw InvalidInput("episode_record", "mae and inference_time must both be set or null");
  }
  return r;
}

void track_best(std::optional<BestResult>& best, const EpisodeRecord& record) {
  if (!record.ok() || !record.feasible) return;
  if (best && !(record.objective < best->objective)) return;
  best = BestResult{record.code,
                    EvaluationResult::success(*record.mae, *record.inference_time),
                    record.objective, record.episode};
}

SearchOutcome run_search(const ParameterCatalog& catalog,
                         const QLearningConfig& qcfg,
                         const ObjectiveConfig& ocfg, CachedEvaluator& evaluator,
                         const SearchHooks& hooks, SearchState state) {
  catalog.check();
  qcfg.check();
  ocfg.check();
  const auto schedule = qcfg.effective_schedule();
  const std::uint64_t stream_root = derive_seed(qcfg.rng_seed, "search");

  SearchOutcome out;
  out.table = std::move(state.table);
  out.best = std::move(state.best);

  int end = qcfg.episodes;
  if (hooks.stop_after >= 0) end = std::min(end, hooks.stop_after);

  int e = state.next_episode;
  for (; e < end; ++e) {
    const double epsilon = epsilon_at(schedule, e);
    Rng rng(derive_seed(stream_root, "trajectory", static_cast<std::uint64_t>(e)));
    ArchitectureCode code = sample_trajectory(out.table, catalog, epsilon, rng);

    const auto t0 = std::chrono::steady_clock::now();
    bool from_cache = false;
    EvaluationResult result;
    try {
      result = evaluator.evaluate(code, &from_cache);
    } catch (const EvaluatorUnavailable&) {
      if (hooks.on_checkpoint) hooks.on_checkpoint(e, out.table);
      throw;
    }
    const auto elapsed = std::chrono::steady_clock::now() - t0;

    const double return_r = episode_return(result, ocfg);
    update_trajectory(out.table, code, return_r, qcfg, catalog);

    EpisodeRecord record;
    record.episode = e;
    record.epsilon = epsilon;
    record.code = std::move(code);
    if (result.ok()) {
      record.mae = result.mae;
      record.inference_time = result.inference_time;
      record.feasible = feasible(result, ocfg);
    }
    record.objective = objective_value(result, ocfg);
    record.return_r = return_r;
    record.from_cache = from_cache;
    if (hooks.record_wall_time) {
      record.wall_time_ms =
          std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
    }
    track_best(out.best, record);
    if (hooks.on_episode) hooks.on_episode(record);
    if (hooks.on_checkpoint && hooks.checkpoint_every > 0 &&
        (e + 1) % hooks.checkpoint_every == 0 && e + 1 < end) {
      hooks.on_checkpoint(e + 1, out.table);
    }
  }
  out.episodes_completed = e;
  if (hooks.on_checkpoint) hooks.on_checkpoint(e, out.table);
  out.greedy = greedy_rollout(out.table, catalog);
  return out;
}

}  // namespace autostgcn
