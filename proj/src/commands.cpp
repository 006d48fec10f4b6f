#include "autostgcn/commands.hpp"

#include <chrono>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "autostgcn/errors.hpp"
#include "autostgcn/evaluator.hpp"
#include "autostgcn/external_evaluator.hpp"
#include "autostgcn/graph_builder.hpp"
#include "autostgcn/run_config.hpp"

namespace autostgcn {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ParameterCatalog load_catalog(const std::optional<fs::path>& config_path) {
  if (!config_path) return ParameterCatalog{};
  const auto text = read_text_file(*config_path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  // Accept either a full run config or a bare catalog document.
  if (j.is_object() && j.contains("catalog")) {
    return catalog_from_json(j.at("catalog").dump());
  }
  if (j.is_object() && (j.contains("qlearning") || j.contains("objective") ||
                        j.contains("evaluator"))) {
    return ParameterCatalog{};
  }
  return catalog_from_json(text);
}

ArchitectureCode load_code(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("syntax", "cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return ArchitectureCode::parse(buf.str());
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

json best_json(const EpisodeRecord& r) {
  return {{"code", r.code.text()},
          {"episode", r.episode},
          {"objective", r.objective},
          {"mae", *r.mae},
          {"inference_time", *r.inference_time},
          {"feasible", r.feasible}};
}

json summary_json(const LogSummary& s) {
  json j;
  j["best"] = s.best ? best_json(*s.best) : json(nullptr);
  j["best_objective"] = s.best ? json(s.best->objective) : json(nullptr);
  j["episodes"] = s.episodes;
  j["feasible_episodes"] = s.feasible_episodes;
  j["failed_episodes"] = s.failed_episodes;
  j["cache"] = {{"hits", s.cache_hits}, {"misses", s.cache_misses}};
  return j;
}

void print_summary_text(const LogSummary& s, std::ostream& out) {
  out << "episodes: " << s.episodes << " (feasible " << s.feasible_episodes
      << ", failed " << s.failed_episodes << ")\n";
  out << "cache: " << s.cache_hits << " hits, " << s.cache_misses << " misses\n";
  if (s.best) {
    out << "best objective: " << json(s.best->objective).dump() << " (episode "
        << s.best->episode << ")\n";
    out << "best code: " << s.best->code.text() << "\n";
  } else {
    out << "best: none\n";
  }
}

EpisodeRecord record_from_best(const BestResult& b) {
  EpisodeRecord r;
  r.episode = b.episode;
  r.code = b.code;
  r.mae = b.result.mae;
  r.inference_time = b.result.inference_time;
  r.feasible = true;
  r.objective = b.objective;
  return r;
}

std::optional<BlockTriple> parse_triple(const std::string& spec) {
  BlockTriple t;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> t.sipm >> c1 >> t.tipm >> c2 >> t.fes) || c1 != ',' || c2 != ',') {
    return std::nullopt;
  }
  in >> std::ws;
  if (!in.eof()) return std::nullopt;
  return t;
}

}  // namespace

std::vector<EpisodeRecord> read_episode_log(const fs::path& path,
                                            std::size_t max_records) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read episode log '" + path.string() + "'");
  std::vector<EpisodeRecord> out;
  std::string line;
  while (out.size() < max_records && std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(EpisodeRecord::from_json_line(line));
  }
  return out;
}

LogSummary summarize_log(const std::vector<EpisodeRecord>& records) {
  LogSummary s;
  for (const auto& r : records) {
    ++s.episodes;
    if (!r.ok()) ++s.failed_episodes;
    if (r.ok() && r.feasible) {
      ++s.feasible_episodes;
      if (!s.best || r.objective < s.best->objective) s.best = r;
    }
    if (r.from_cache) {
      ++s.cache_hits;
    } else {
      ++s.cache_misses;
    }
  }
  return s;
}

int cmd_search(const SearchOptions& opts, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  RunConfig cfg;
  SurrogateWeights weights;
  try {
    cfg = RunConfig::load(opts.config_path);
    if (opts.seed) cfg.qlearning.rng_seed = *opts.seed;
    if (opts.episodes) {
      if (*opts.episodes < 0) throw ConfigError("--episodes must be >= 0");
      cfg.qlearning.episodes = *opts.episodes;
    }
    if (opts.out_dir) cfg.out_dir = *opts.out_dir;
    if (const auto* s = std::get_if<SurrogateEvaluatorConfig>(&cfg.evaluator)) {
      if (s->weights_path) weights = SurrogateWeights::load(s->weights_path->string());
      if (!(surrogate_mae_lower_bound(weights, cfg.catalog) > 0.0)) {
        throw ConfigError("surrogate weights can produce a non-positive MAE");
      }
    }
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::kConfig;
  }

  std::unique_ptr<ExternalEvaluator> external;
  EvalFn inner;
  if (const auto* x = std::get_if<ExternalEvaluatorConfig>(&cfg.evaluator)) {
    try {
      external = std::make_unique<ExternalEvaluator>(
          WorkerCommand{x->command, x->args}, cfg.catalog, cfg.signature,
          x->timeout_ms, x->train_epochs);
    } catch (const EvaluatorUnavailable& e) {
      err << "evaluator error: " << e.what() << "\n";
      return exit_code::kEvaluator;
    }
    inner = [ev = external.get()](const ArchitectureCode& c) { return ev->evaluate(c); };
  } else {
    inner = [weights](const ArchitectureCode& c) {
      return surrogate_evaluate(c, weights);
    };
  }

  if (cfg.t_max_reference && cfg.t_max_reference->code) {
    try {
      const auto ref = inner(ArchitectureCode::parse(*cfg.t_max_reference->code));
      if (!ref.ok()) {
        err << "evaluator error: reference model failed: " << ref.reason << "\n";
        return exit_code::kEvaluator;
      }
      cfg.objective.t_max = 2.0 * ref.inference_time;
    } catch (const EvaluatorUnavailable& e) {
      err << "evaluator error: " << e.what() << "\n";
      return exit_code::kEvaluator;
    }
  }

  const fs::path dir = cfg.out_dir;
  const fs::path log_path = dir / kEpisodesFile;
  const fs::path q_path = dir / kQTableFile;
  CachedEvaluator evaluator(inner);
  SearchState state;

  try {
    fs::create_directories(dir);
    if (opts.resume && fs::exists(q_path)) {
      const auto checkpoint = QCheckpoint::from_json(read_text_file(q_path));
      if (checkpoint.rng_state_seed != cfg.qlearning.rng_seed ||
          checkpoint.alpha != cfg.qlearning.alpha ||
          checkpoint.gamma != cfg.qlearning.gamma) {
        throw ConfigError("checkpoint does not match the configured seed/alpha/gamma");
      }
      // Lines past the checkpoint (possibly torn by the interrupt) are dropped.
      auto records = fs::exists(log_path)
                         ? read_episode_log(log_path,
                                            static_cast<std::size_t>(checkpoint.episode))
                         : std::vector<EpisodeRecord>{};
      if (static_cast<int>(records.size()) < checkpoint.episode) {
        throw ConfigError("episode log is shorter than the checkpoint");
      }
      std::string kept;
      for (const auto& r : records) {
        if (r.ok()) {
          evaluator.seed(r.code, EvaluationResult::success(*r.mae, *r.inference_time));
        }
        kept += r.to_json_line();
        kept += '\n';
        std::optional<BestResult> best = state.best;
        track_best(best, r);
        state.best = best;
      }
      const auto summary = summarize_log(records);
      evaluator.restore_counters(summary.cache_hits, summary.cache_misses);
      write_file_atomic(log_path, kept);
      state.next_episode = checkpoint.episode;
      state.table = checkpoint.table;
    } else {
      std::ofstream(log_path, std::ios::trunc);
    }
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::kConfig;
  } catch (const fs::filesystem_error& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::kConfig;
  }

  std::ofstream log(log_path, std::ios::app | std::ios::binary);
  if (!log) {
    err << "config error: cannot open '" << log_path.string() << "'\n";
    return exit_code::kConfig;
  }

  SearchHooks hooks;
  hooks.record_wall_time = cfg.log_wall_time;
  hooks.stop_after = opts.stop_after.value_or(-1);
  hooks.on_episode = [&log](const EpisodeRecord& r) {
    log << r.to_json_line() << '\n';
    log.flush();
  };
  hooks.on_checkpoint = [&](int completed, const QTable& table) {
    QCheckpoint c{completed, cfg.qlearning.rng_seed, cfg.qlearning.alpha,
                  cfg.qlearning.gamma, table};
    write_file_atomic(q_path, c.to_json());
  };

  SearchOutcome outcome;
  try {
    outcome = run_search(cfg.catalog, cfg.qlearning, cfg.objective, evaluator,
                         hooks, std::move(state));
  } catch (const EvaluatorUnavailable& e) {
    err << "evaluator error: " << e.what() << " (checkpoint kept in "
        << q_path.string() << ")\n";
    return exit_code::kEvaluator;
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::kConfig;
  }
  log.close();
  if (external) external->shutdown();

  const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();

  const fs::path best_code_path = dir / kBestCodeFile;
  const fs::path best_graph_path = dir / kBestGraphFile;
  LogSummary s;
  s.episodes = outcome.episodes_completed;
  {
    const auto summary = summarize_log(read_episode_log(log_path));
    s.feasible_episodes = summary.feasible_episodes;
    s.failed_episodes = summary.failed_episodes;
  }
  s.cache_hits = evaluator.hits();
  s.cache_misses = evaluator.misses();
  if (outcome.best) {
    s.best = record_from_best(*outcome.best);
    write_file_atomic(best_code_path, outcome.best->code.text() + "\n");
    write_file_atomic(best_graph_path,
                      to_json(build_graph(outcome.best->code, cfg.catalog,
                                          cfg.signature)) +
                          "\n");
  } else {
    fs::remove(best_code_path);
    fs::remove(best_graph_path);
  }

  json summary = summary_json(s);
  summary["greedy_code"] = outcome.greedy.text();
  summary["wall_time_ms"] = wall_ms;
  summary["t_max"] = cfg.objective.t_max;
  summary["rng_seed"] = cfg.qlearning.rng_seed;
  summary["complete"] = outcome.episodes_completed >= cfg.qlearning.episodes;
  write_file_atomic(dir / kSummaryFile, summary.dump(2) + "\n");

  if (opts.format == OutputFormat::Json) {
    out << summary.dump() << "\n";
  } else {
    print_summary_text(s, out);
    out << "greedy code: " << outcome.greedy.text() << "\n";
    out << "output: " << dir.string() << "\n";
  }
  return exit_code::kOk;
}

int cmd_validate(const fs::path& code_path,
                 const std::optional<fs::path>& config_path, OutputFormat format,
                 std::ostream& out, std::ostream& err) {
  ParameterCatalog catalog;
  ArchitectureCode code;
  try {
    catalog = load_catalog(config_path);
    code = load_code(code_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kConfig;
  }
  const auto violations = validate_code(code, catalog);
  if (format == OutputFormat::Json) {
    json list = json::array();
    for (const auto& v : violations) {
      list.push_back({{"position", v.position},
                      {"state_index", v.state_index},
                      {"rule", v.rule},
                      {"message", v.message}});
    }
    out << json{{"valid", violations.empty()}, {"violations", list}}.dump() << "\n";
  } else if (violations.empty()) {
    out << "valid (" << code.block_count() << " blocks)\n";
  } else {
    for (const auto& v : violations) out << to_string(v) << "\n";
  }
  return violations.empty() ? exit_code::kOk : exit_code::kInvalid;
}

int cmd_decode(const fs::path& code_path,
               const std::optional<fs::path>& config_path,
               const SignatureOverrides& sig, std::ostream& out,
               std::ostream& err) {
  ParameterCatalog catalog;
  ProblemSignature signature;
  ArchitectureCode code;
  try {
    if (config_path) {
      const auto text = read_text_file(*config_path);
      const auto j = json::parse(text, nullptr, false);
      if (!j.is_discarded() && j.is_object() && j.contains("signature")) {
        const auto& s = j.at("signature");
        signature.history_len = s.value("history_len", signature.history_len);
        signature.horizon = s.value("horizon", signature.horizon);
        signature.node_count = s.value("node_count", signature.node_count);
        signature.feature_count = s.value("feature_count", signature.feature_count);
      }
    }
    catalog = load_catalog(config_path);
    if (sig.history_len) signature.history_len = *sig.history_len;
    if (sig.horizon) signature.horizon = *sig.horizon;
    if (sig.node_count) signature.node_count = *sig.node_count;
    if (sig.feature_count) signature.feature_count = *sig.feature_count;
    signature.check();
    code = load_code(code_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kConfig;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kConfig;
  }
  try {
    out << to_json(build_graph(code, catalog, signature)) << "\n";
  } catch (const InvalidCode& e) {
    err << "invalid code: " << e.what() << "\n";
    return exit_code::kInvalid;
  }
  return exit_code::kOk;
}

int cmd_space_size(const std::optional<fs::path>& config_path,
                   OutputFormat format, std::ostream& out, std::ostream& err) {
  ParameterCatalog catalog;
  try {
    catalog = load_catalog(config_path);
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::kConfig;
  }
  const std::string size = space_size(catalog).str();
  if (format == OutputFormat::Json) {
    // As a string: the count can exceed 2^53.
    out << json{{"space_size", size}}.dump() << "\n";
  } else {
    out << size << "\n";
  }
  return exit_code::kOk;
}

int cmd_ablate(const fs::path& code_path, const std::string& kind,
               const std::optional<std::string>& spec,
               const std::optional<fs::path>& config_path, OutputFormat format,
               std::ostream& out, std::ostream& err) {
  ParameterCatalog catalog;
  ArchitectureCode code;
  try {
    catalog = load_catalog(config_path);
    code = load_code(code_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kConfig;
  }

  Ablation ablation;
  auto need_triple = [&]() -> std::optional<BlockTriple> {
    if (!spec) return std::nullopt;
    return parse_triple(*spec);
  };
  if (kind == "linearize" || kind == "no-flexibility") {
    ablation = Ablation::linearize();
  } else if (kind == "no-diversity") {
    ablation = Ablation::uniform_blocks({2, 2, 3});
  } else if (kind == "single-source") {
    ablation = Ablation::both({3, 2, 4});
  } else if (kind == "uniform" || kind == "both") {
    const auto triple = need_triple();
    if (!triple) {
      err << "invalid spec: '" << kind << "' needs --spec sipm,tipm,fes\n";
      return exit_code::kInvalid;
    }
    ablation = kind == "uniform" ? Ablation::uniform_blocks(*triple)
                                 : Ablation::both(*triple);
  } else {
    err << "invalid spec: unknown ablation kind '" << kind << "'\n";
    return exit_code::kInvalid;
  }

  ArchitectureCode result;
  try {
    result = apply_ablation(code, ablation, catalog);
  } catch (const InvalidSpec& e) {
    err << "invalid spec: " << e.what() << "\n";
    return exit_code::kInvalid;
  } catch (const InvalidCode& e) {
    err << "invalid code: " << e.what() << "\n";
    return exit_code::kInvalid;
  }
  if (format == OutputFormat::Json) {
    out << json{{"code", result.text()}}.dump() << "\n";
  } else {
    out << result.text() << "\n";
  }
  return exit_code::kOk;
}

int cmd_replay(const fs::path& episodes_path, OutputFormat format,
               std::ostream& out, std::ostream& err) {
  std::vector<EpisodeRecord> records;
  try {
    records = read_episode_log(episodes_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kConfig;
  }
  const auto s = summarize_log(records);
  if (format == OutputFormat::Json) {
    out << summary_json(s).dump() << "\n";
  } else {
    print_summary_text(s, out);
  }
  return exit_code::kOk;
}

}  // namespace autostgcn
