#include "autostgcn/evaluator.hpp"

namespace autostgcn {

EvaluationResult CachedEvaluator::evaluate(const ArchitectureCode& code,
                                           bool* from_cache) {
  const std::string key = code.text();
  if (const auto it = store_.find(key); it != store_.end()) {
    ++hits_;
    if (from_cache) *from_cache = true;
    return it->second;
  }
  ++misses_;
  if (from_cache) *from_cache = false;
  EvaluationResult result = inner_(code);
  if (result.ok()) store_.emplace(key, result);
  return result;
}

void CachedEvaluator::seed(const ArchitectureCode& code,
                           const EvaluationResult& result) {
  if (result.ok()) store_.insert_or_assign(code.text(), result);
}

}  // namespace autostgcn
