#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "autostgcn/errors.hpp"
#include "autostgcn/graph_builder.hpp"
#include "autostgcn/objective.hpp"
#include "autostgcn/search_space.hpp"

namespace autostgcn {

class Subprocess;

inline constexpr int kProtocolVersion = 1;

struct ProtocolError : Error {
  using Error::Error;
};
struct WorkerTimeout : Error {
  using Error::Error;
};
struct WorkerExited : Error {
  using Error::Error;
};

struct WorkerCommand {
  std::string command;
  std::vector<std::string> args;
};

// Wire records of the JSON-lines worker protocol. Each returns one line
// without the trailing newline.
std::string encode_evaluate_request(std::int64_t id, const ArchitectureCode& code,
                                    const ModelGraph& graph, int train_epochs);
std::string encode_shutdown();

struct WorkerReply {
  std::int64_t id = -1;
  bool is_error = false;
  double mae = 0.0;
  double inference_time = 0.0;
  std::string message;
};

// Throws ProtocolError if the line is not a well-formed result/error record.
WorkerReply decode_worker_reply(const std::string& line);

/// Drives one long-lived worker process over its stdin/stdout.
///
/// Requests are strictly sequential. A timeout, an id mismatch or a malformed
/// reply fails only the current request; the worker is then restarted before
/// the next one. EvaluatorUnavailable is thrown only when a worker cannot be
/// started or does not complete the handshake.
class ExternalEvaluator {
 public:
  ExternalEvaluator(WorkerCommand command, ParameterCatalog catalog,
                    ProblemSignature signature, int timeout_ms,
                    int train_epochs = 5);
  ~ExternalEvaluator();

  ExternalEvaluator(const ExternalEvaluator&) = delete;
  ExternalEvaluator& operator=(const ExternalEvaluator&) = delete;

  // Never throws for per-request faults; see class comment.
  EvaluationResult evaluate(const ArchitectureCode& code);

  // Like evaluate() but surfaces ProtocolError / WorkerTimeout / WorkerExited.
  EvaluationResult request(const ArchitectureCode& code);

  void shutdown();

  const std::string& worker_name() const { return worker_name_; }
  std::size_t restarts() const { return starts_ > 0 ? starts_ - 1 : 0; }
  std::int64_t last_request_id() const { return next_id_ - 1; }

 private:
  void ensure_worker();
  void drop_worker();

  WorkerCommand command_;
  ParameterCatalog catalog_;
  ProblemSignature signature_;
  int timeout_ms_;
  int train_epochs_;
  std::unique_ptr<Subprocess> worker_;
  std::string worker_name_;
  std::int64_t next_id_ = 1;
  std::size_t starts_ = 0;
};

}  // namespace autostgcn
