#include "autostgcn/run_config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <json.hpp>

#include "autostgcn/errors.hpp"

namespace autostgcn {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const char* section,
                    std::initializer_list<const char*> known) {
  if (!j.is_object()) {
    throw ConfigError(std::string(section) + " must be a JSON object");
  }
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(std::string("unknown field '") + key + "' in " + section);
    }
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

ParameterCatalog parse_catalog(const json& j) {
  reject_unknown(j, "catalog",
                 {"max_blocks", "is_options", "sipm_options", "tipm_options",
                  "fes_options", "os_options", "fsc_options", "mbof_options",
                  "lf_options", "bs_options", "ilr_options", "of_options"});
  ParameterCatalog c;
  read(j, "max_blocks", c.max_blocks);
  read(j, "is_options", c.is_options);
  read(j, "sipm_options", c.sipm_options);
  read(j, "tipm_options", c.tipm_options);
  read(j, "fes_options", c.fes_options);
  read(j, "os_options", c.os_options);
  read(j, "fsc_options", c.fsc_options);
  read(j, "mbof_options", c.mbof_options);
  read(j, "lf_options", c.lf_options);
  read(j, "bs_options", c.bs_options);
  read(j, "ilr_options", c.ilr_options);
  read(j, "of_options", c.of_options);
  const auto problems = c.violations();
  if (!problems.empty()) throw ConfigError("catalog: " + problems.front());
  return c;
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ParameterCatalog catalog_from_json(std::string_view text) {
  try {
    return parse_catalog(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("catalog: ") + e.what());
  }
}

std::string catalog_to_json(const ParameterCatalog& c) {
  json j;
  j["max_blocks"] = c.max_blocks;
  j["is_options"] = c.is_options;
  j["sipm_options"] = c.sipm_options;
  j["tipm_options"] = c.tipm_options;
  j["fes_options"] = c.fes_options;
  j["os_options"] = c.os_options;
  j["fsc_options"] = c.fsc_options;
  j["mbof_options"] = c.mbof_options;
  j["lf_options"] = c.lf_options;
  j["bs_options"] = c.bs_options;
  j["ilr_options"] = c.ilr_options;
  j["of_options"] = c.of_options;
  return j.dump();
}

RunConfig RunConfig::from_json(std::string_view text,
                               const std::filesystem::path& base_dir) {
  RunConfig cfg;
  try {
    const json j = json::parse(text);
    reject_unknown(j, "config",
                   {"catalog", "qlearning", "objective", "evaluator", "signature",
                    "out_dir", "log_wall_time"});

    if (j.contains("catalog")) cfg.catalog = parse_catalog(j.at("catalog"));

    if (j.contains("qlearning")) {
      const auto& q = j.at("qlearning");
      reject_unknown(q, "qlearning",
                     {"alpha", "gamma", "episodes", "epsilon_schedule", "rng_seed"});
      read(q, "alpha", cfg.qlearning.alpha);
      read(q, "gamma", cfg.qlearning.gamma);
      read(q, "episodes", cfg.qlearning.episodes);
      read(q, "rng_seed", cfg.qlearning.rng_seed);
      if (q.contains("epsilon_schedule")) {
        for (const auto& bp : q.at("epsilon_schedule")) {
          if (!bp.is_array() || bp.size() != 2) {
            throw ConfigError("epsilon_schedule entries must be [episode, epsilon]");
          }
          cfg.qlearning.epsilon_schedule.push_back(
              {bp[0].get<int>(), bp[1].get<double>()});
        }
        if (cfg.qlearning.epsilon_schedule.empty()) {
          throw ConfigError("epsilon_schedule must not be empty when given");
        }
      }
    }
    cfg.qlearning.check();

    bool have_t_max = false;
    if (j.contains("objective")) {
      const auto& o = j.at("objective");
      reject_unknown(o, "objective",
                     {"lambda", "t_max", "t_max_reference", "hard_reject",
                      "failure_mae"});
      read(o, "lambda", cfg.objective.lambda);
      read(o, "hard_reject", cfg.objective.hard_reject);
      read(o, "failure_mae", cfg.objective.failure_mae);
      if (o.contains("t_max")) {
        cfg.objective.t_max = o.at("t_max").get<double>();
        have_t_max = true;
      }
      if (o.contains("t_max_reference")) {
        if (have_t_max) {
          throw ConfigError("give either objective.t_max or t_max_reference, not both");
        }
        const auto& r = o.at("t_max_reference");
        reject_unknown(r, "t_max_reference", {"time", "code"});
        TMaxReference ref;
        if (r.contains("time")) ref.time = r.at("time").get<double>();
        if (r.contains("code")) ref.code = r.at("code").get<std::string>();
        if (ref.time.has_value() == ref.code.has_value()) {
          throw ConfigError("t_max_reference needs exactly one of 'time' or 'code'");
        }
        if (ref.time) {
          if (!(*ref.time > 0.0)) throw ConfigError("t_max_reference.time must be positive");
          cfg.objective.t_max = 2.0 * *ref.time;
          have_t_max = true;
        } else {
          const auto code = ArchitectureCode::parse(*ref.code);
          if (!validate_code(code, cfg.catalog).empty()) {
            throw ConfigError("t_max_reference.code is not valid under the catalog");
          }
        }
        cfg.t_max_reference = ref;
      }
    }
    if (!have_t_max && !(cfg.t_max_reference && cfg.t_max_reference->code)) {
      throw ConfigError("objective.t_max (or objective.t_max_reference) is required");
    }
    if (have_t_max) cfg.objective.check();

    if (j.contains("evaluator")) {
      const auto& e = j.at("evaluator");
      const auto kind = e.value("kind", std::string("surrogate"));
      if (kind == "surrogate") {
        reject_unknown(e, "evaluator", {"kind", "weights_path"});
        SurrogateEvaluatorConfig s;
        if (e.contains("weights_path") && !e.at("weights_path").is_null()) {
          s.weights_path = resolve(base_dir, e.at("weights_path").get<std::string>());
          if (!std::filesystem::exists(*s.weights_path)) {
            throw ConfigError("weights_path '" + s.weights_path->string() +
                              "' does not exist");
          }
        }
        cfg.evaluator = s;
      } else if (kind == "external") {
        reject_unknown(e, "evaluator",
                       {"kind", "command", "args", "timeout_ms", "train_epochs"});
        ExternalEvaluatorConfig x;
        x.command = e.at("command").get<std::string>();
        read(e, "args", x.args);
        read(e, "timeout_ms", x.timeout_ms);
        read(e, "train_epochs", x.train_epochs);
        if (x.command.empty()) throw ConfigError("evaluator.command is empty");
        if (x.timeout_ms <= 0) throw ConfigError("evaluator.timeout_ms must be positive");
        if (x.train_epochs <= 0) throw ConfigError("evaluator.train_epochs must be positive");
        cfg.evaluator = x;
      } else {
        throw ConfigError("evaluator.kind must be 'surrogate' or 'external'");
      }
    }

    if (j.contains("signature")) {
      const auto& s = j.at("signature");
      reject_unknown(s, "signature",
                     {"history_len", "horizon", "node_count", "feature_count"});
      read(s, "history_len", cfg.signature.history_len);
      read(s, "horizon", cfg.signature.horizon);
      read(s, "node_count", cfg.signature.node_count);
      read(s, "feature_count", cfg.signature.feature_count);
      try {
        cfg.signature.check();
      } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
      }
    }

    if (j.contains("out_dir")) {
      cfg.out_dir = resolve(base_dir, j.at("out_dir").get<std::string>());
    } else {
      cfg.out_dir = resolve(base_dir, "run");
    }
    read(j, "log_wall_time", cfg.log_wall_time);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  return from_json(read_text_file(path), path.parent_path());
}

}  // namespace autostgcn
