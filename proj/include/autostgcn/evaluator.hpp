#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <string_view>

#include "autostgcn/objective.hpp"
#include "autostgcn/search_space.hpp"

namespace autostgcn {

using EvalFn = std::function<EvaluationResult(const ArchitectureCode&)>;

/// Additive stand-in for short training runs.
///
/// Each table is indexed by option ordinal - 1 (the FSC table by filter size
/// ordinal). Block-level tables (sipm, tipm, fes) are summed over blocks.
/// The defaults reward distinct embedding structures across blocks and
/// non-sequential wiring.
struct SurrogateWeights {
  double base = 30.0;
  std::array<double, 2> is{-0.8, 0.0};
  std::array<double, 3> os{-0.4, 0.0, -0.6};
  std::array<double, 3> fsc{0.0, -0.3, -0.5};
  std::array<double, 2> mbof{0.0, -0.1};
  std::array<double, 4> sipm{-0.5, -1.0, -0.7, 0.0};
  std::array<double, 3> tipm{-0.6, -0.8, 0.0};
  std::array<double, 4> fes{-1.6, -0.4, -1.2, -2.0};
  std::array<double, 2> lf{0.0, -0.2};
  std::array<double, 3> bs{-0.1, 0.0, -0.05};
  std::array<double, 3> ilr{-0.15, -0.05, 0.0};
  std::array<double, 3> of{0.0, -0.1, -0.2};
  // Applied as coeff * (distinct FES among blocks - 1).
  double diversity_coeff = -0.5;
  // Applied once if any block i reads from something other than block i-1.
  double nonseq_bonus = -0.3;
  // Keyed by block count; missing counts contribute 0.
  std::map<int, double> depth_penalty{{1, 0.6}, {4, 0.4}};

  double time_base = 2.0;
  double time_per_block = 1.0;
  // Per block: time_fsc_coeff * (filter_size / 16 - 1).
  double time_fsc_coeff = 0.5;
  std::array<double, 4> fes_time{1.2, 0.4, 0.8, 1.5};

  std::string to_json() const;
  // Missing keys keep their defaults. Throws ConfigError on bad shapes.
  static SurrogateWeights from_json(std::string_view text);
  static SurrogateWeights load(const std::string& path);
};

// Smallest MAE the weights can produce over `catalog` (additive bound; may be
// below the true minimum, never above it).
double surrogate_mae_lower_bound(const SurrogateWeights& w,
                                 const ParameterCatalog& catalog);

// Precondition: `code` is valid. Pure and deterministic.
EvaluationResult surrogate_evaluate(const ArchitectureCode& code,
                                    const SurrogateWeights& w);

/// Memoizes successful evaluations keyed by canonical code text.
/// Failed results are returned but never stored.
class CachedEvaluator {
 public:
  explicit CachedEvaluator(EvalFn inner) : inner_(std::move(inner)) {}

  EvaluationResult operator()(const ArchitectureCode& code) {
    return evaluate(code, nullptr);
  }
  EvaluationResult evaluate(const ArchitectureCode& code, bool* from_cache);

  // Used when rebuilding state from a log; does not touch the counters.
  void seed(const ArchitectureCode& code, const EvaluationResult& result);
  void restore_counters(std::size_t hits, std::size_t misses) {
    hits_ = hits;
    misses_ = misses;
  }

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }
  std::size_t size() const { return store_.size(); }

 private:
  EvalFn inner_;
  std::map<std::string, EvaluationResult, std::less<>> store_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace autostgcn
