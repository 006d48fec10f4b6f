#include "autostgcn/external_evaluator.hpp"

#include <cmath>
#include <system_error>

#include <json.hpp>

#include "autostgcn/subprocess.hpp"

namespace autostgcn {

using nlohmann::json;

std::string encode_evaluate_request(std::int64_t id, const ArchitectureCode& code,
                                    const ModelGraph& graph, int train_epochs) {
  json j;
  j["type"] = "evaluate";
  j["id"] = id;
  j["code"] = code.text();
  j["graph"] = json::parse(to_json(graph));
  j["train_epochs"] = train_epochs;
  return j.dump();
}

std::string encode_shutdown() { return json{{"type", "shutdown"}}.dump(); }

WorkerReply decode_worker_reply(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception&) {
    throw ProtocolError("malformed reply line: " + line);
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw ProtocolError("reply lacks a string 'type'");
  }
  if (!j.contains("id") || !j["id"].is_number_integer()) {
    throw ProtocolError("reply lacks an integer 'id'");
  }
  WorkerReply r;
  r.id = j["id"].get<std::int64_t>();
  const auto type = j["type"].get<std::string>();
  if (type == "error") {
    r.is_error = true;
    if (j.contains("message") && j["message"].is_string()) {
      r.message = j["message"].get<std::string>();
    }
    return r;
  }
  if (type != "result") throw ProtocolError("unexpected reply type '" + type + "'");
  if (!j.contains("mae") || !j["mae"].is_number() ||
      !j.contains("inference_time") || !j["inference_time"].is_number()) {
    throw ProtocolError("result needs numeric 'mae' and 'inference_time'");
  }
  r.mae = j["mae"].get<double>();
  r.inference_time = j["inference_time"].get<double>();
  if (!std::isfinite(r.mae) || r.mae < 0.0) {
    throw ProtocolError("result mae must be finite and non-negative");
  }
  if (!std::isfinite(r.inference_time) || r.inference_time <= 0.0) {
    throw ProtocolError("result inference_time must be finite and positive");
  }
  return r;
}

ExternalEvaluator::ExternalEvaluator(WorkerCommand command,
                                     ParameterCatalog catalog,
                                     ProblemSignature signature, int timeout_ms,
                                     int train_epochs)
    : command_(std::move(command)),
      catalog_(std::move(catalog)),
      signature_(signature),
      timeout_ms_(timeout_ms),
      train_epochs_(train_epochs) {
  ensure_worker();
}

ExternalEvaluator::~ExternalEvaluator() { shutdown(); }

void ExternalEvaluator::ensure_worker() {
  if (worker_ && worker_->running()) return;
  drop_worker();
  std::vector<std::string> argv{command_.command};
  argv.insert(argv.end(), command_.args.begin(), command_.args.end());
  try {
    worker_ = std::make_unique<Subprocess>(argv);
  } catch (const std::system_error& e) {
    throw EvaluatorUnavailable("cannot start worker '" + command_.command +
                               "': " + e.what());
  }
  ++starts_;

  std::string line;
  const auto status = worker_->read_line(line, timeout_ms_);
  if (status != Subprocess::ReadStatus::Line) {
    drop_worker();
    throw EvaluatorUnavailable(status == Subprocess::ReadStatus::Timeout
                                   ? "worker sent no hello before timeout"
                                   : "worker exited before hello");
  }
  try {
    const json hello = json::parse(line);
    if (hello.value("type", "") != "hello") {
      throw EvaluatorUnavailable("first worker line is not a hello record");
    }
    if (hello.value("protocol_version", -1) != kProtocolVersion) {
      throw EvaluatorUnavailable("worker speaks an unsupported protocol version");
    }
    worker_name_ = hello.value("name", std::string{});
  } catch (const json::exception&) {
    drop_worker();
    throw EvaluatorUnavailable("malformed hello line: " + line);
  } catch (const EvaluatorUnavailable&) {
    drop_worker();
    throw;
  }
}

void ExternalEvaluator::drop_worker() {
  if (worker_) {
    worker_->terminate(0);
    worker_.reset();
  }
}

EvaluationResult ExternalEvaluator::request(const ArchitectureCode& code) {
  ensure_worker();
  const ModelGraph graph = build_graph(code, catalog_, signature_);
  const std::int64_t id = next_id_++;
  if (!worker_->write_line(encode_evaluate_request(id, code, graph, train_epochs_))) {
    drop_worker();
    throw WorkerExited("worker closed its input");
  }
  std::string line;
  switch (worker_->read_line(line, timeout_ms_)) {
    case Subprocess::ReadStatus::Timeout:
      // A late reply would desynchronise ids; start fresh next time.
      drop_worker();
      throw WorkerTimeout("timeout");
    case Subprocess::ReadStatus::Eof:
      drop_worker();
      throw WorkerExited("worker exited");
    case Subprocess::ReadStatus::Line:
      break;
  }
  WorkerReply reply;
  try {
    reply = decode_worker_reply(line);
  } catch (const ProtocolError&) {
    drop_worker();
    throw;
  }
  if (reply.id != id) {
    drop_worker();
    throw ProtocolError("reply id " + std::to_string(reply.id) +
                        " does not match request id " + std::to_string(id));
  }
  if (reply.is_error) {
    return EvaluationResult::failure("worker error: " + reply.message);
  }
  return EvaluationResult::success(reply.mae, reply.inference_time);
}

EvaluationResult ExternalEvaluator::evaluate(const ArchitectureCode& code) {
  try {
    return request(code);
  } catch (const WorkerTimeout&) {
    return EvaluationResult::failure("timeout");
  } catch (const WorkerExited& e) {
    return EvaluationResult::failure(e.what());
  } catch (const ProtocolError& e) {
    return EvaluationResult::failure(std::string("protocol error: ") + e.what());
  }
}

void ExternalEvaluator::shutdown() {
  if (!worker_) return;
  if (worker_->running()) worker_->write_line(encode_shutdown());
  worker_->close_stdin();
  worker_->terminate(1000);
  worker_.reset();
}

}  // namespace autostgcn
