#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "autostgcn/graph_builder.hpp"
#include "autostgcn/objective.hpp"
#include "autostgcn/qlearning.hpp"
#include "autostgcn/search_space.hpp"

namespace autostgcn {

struct SurrogateEvaluatorConfig {
  std::optional<std::filesystem::path> weights_path;
};

struct ExternalEvaluatorConfig {
  std::string command;
  std::vector<std::string> args;
  int timeout_ms = 600000;
  int train_epochs = 5;
};

using EvaluatorConfig =
    std::variant<SurrogateEvaluatorConfig, ExternalEvaluatorConfig>;

/// Where t_max comes from when it is not given directly: twice the inference
/// time of a reference model, either measured elsewhere (`time`) or
/// evaluated at start-up with the configured evaluator (`code`).
struct TMaxReference {
  std::optional<double> time;
  std::optional<std::string> code;
};

/// One JSON document. Every section is optional except that the objective
/// needs either "t_max" or "t_max_reference". Relative paths resolve against
/// the directory of the config file.
///
///   {
///     "catalog":   {"max_blocks":4, "is_options":[1,2], ..., "fsc_options":[16,32,64]},
///     "qlearning": {"alpha":0.001, "gamma":0.9, "episodes":2000,
///                   "epsilon_schedule":[[0,0.9],[200,0.9],[1800,0.0]], "rng_seed":0},
///     "objective": {"lambda":5.6e-9, "t_max":12.0, "hard_reject":true, "failure_mae":1e6},
///     "evaluator": {"kind":"surrogate", "weights_path":"weights.json"}
///                | {"kind":"external", "command":"python3", "args":["worker.py"],
///                   "timeout_ms":600000, "train_epochs":5},
///     "signature": {"history_len":12, "horizon":12, "node_count":358, "feature_count":1},
///     "out_dir":   "runs/default",
///     "log_wall_time": false
///   }
struct RunConfig {
  ParameterCatalog catalog;
  QLearningConfig qlearning;
  ObjectiveConfig objective;
  std::optional<TMaxReference> t_max_reference;
  EvaluatorConfig evaluator = SurrogateEvaluatorConfig{};
  ProblemSignature signature;
  std::filesystem::path out_dir = "run";
  bool log_wall_time = false;

  // Throws ConfigError.
  static RunConfig from_json(std::string_view text,
                             const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);
};

// Throws ConfigError.
ParameterCatalog catalog_from_json(std::string_view text);
std::string catalog_to_json(const ParameterCatalog& catalog);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace autostgcn
