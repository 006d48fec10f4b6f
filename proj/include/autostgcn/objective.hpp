#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace autostgcn {

struct ObjectiveConfig {
  double lambda = std::exp(-19.0);
  double t_max = 1.0;
  // Infeasible results earn the failure penalty instead of the barrier value.
  bool hard_reject = true;
  double failure_mae = 1e6;

  void check() const;
};

struct EvaluationResult {
  enum class Status { Ok, Failed };

  double mae = 0.0;
  double inference_time = 0.0;
  Status status = Status::Ok;
  std::string reason;  // set when failed

  bool ok() const { return status == Status::Ok; }

  static EvaluationResult success(double mae, double inference_time) {
    return {mae, inference_time, Status::Ok, {}};
  }
  static EvaluationResult failure(std::string reason) {
    return {0.0, 0.0, Status::Failed, std::move(reason)};
  }
};

// inference_time <= t_max. Throws FailedEvaluation for failed results.
bool feasible(const EvaluationResult& r, const ObjectiveConfig& cfg);

// mae - lambda * ln(t_max / T); failure_mae for failed results. Lower is better.
double objective_value(const EvaluationResult& r, const ObjectiveConfig& cfg);

// Episode return R handed to the learner.
double episode_return(const EvaluationResult& r, const ObjectiveConfig& cfg);

// Splits R evenly over the transitions of one trajectory.
std::vector<double> shape_rewards(double total, int num_transitions);

}  // namespace autostgcn
