#include "autostgcn/objective.hpp"

#include "autostgcn/errors.hpp"

namespace autostgcn {

void ObjectiveConfig::check() const {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    throw ConfigError("objective.t_max must be a positive finite number");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("objective.lambda must be non-negative");
  }
  if (!(failure_mae > 0.0)) {
    throw ConfigError("objective.failure_mae must be positive");
  }
}

bool feasible(const EvaluationResult& r, const ObjectiveConfig& cfg) {
  if (!r.ok()) throw FailedEvaluation("evaluation failed: " + r.reason);
  return r.inference_time <= cfg.t_max;
}

double objective_value(const EvaluationResult& r, const ObjectiveConfig& cfg) {
  if (!r.ok()) return cfg.failure_mae;
  return r.mae - cfg.lambda * std::log(cfg.t_max / r.inference_time);
}

double episode_return(const EvaluationResult& r, const ObjectiveConfig& cfg) {
  if (!r.ok()) return -cfg.failure_mae;
  if (cfg.hard_reject && !feasible(r, cfg)) return -cfg.failure_mae;
  return -objective_value(r, cfg);
}

std::vector<double> shape_rewards(double total, int num_transitions) {
  if (num_transitions < 1) {
    throw ZeroTransitions("reward shaping needs at least one transition");
  }
  return std::vector<double>(static_cast<std::size_t>(num_transitions),
                             total / num_transitions);
}

}  // namespace autostgcn
