#pragma once

#include <stdexcept>
#include <string>

namespace autostgcn {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input violates a named structural rule.
class InvalidInput : public Error {
 public:
  InvalidInput(std::string rule, const std::string& what)
      : Error(rule + ": " + what), rule_(std::move(rule)) {}
  const std::string& rule() const noexcept { return rule_; }

 private:
  std::string rule_;
};

struct TerminalState : Error {
  using Error::Error;
};
struct IndexOutOfRange : Error {
  using Error::Error;
};
struct InvalidCode : Error {
  using Error::Error;
};
struct InvalidSpec : Error {
  using Error::Error;
};
struct FailedEvaluation : Error {
  using Error::Error;
};
struct ZeroTransitions : Error {
  using Error::Error;
};
struct EmptySchedule : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
// The evaluator backend cannot be reached at all (not a single bad request).
struct EvaluatorUnavailable : Error {
  using Error::Error;
};

}  // namespace autostgcn
