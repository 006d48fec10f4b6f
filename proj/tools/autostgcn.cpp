// Command-line front end for the architecture search engine.

#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "autostgcn/commands.hpp"

using namespace autostgcn;

int main(int argc, char** argv) {
  CLI::App app{"Constraint-aware Q-learning search over parameterized STGCN architectures"};
  app.require_subcommand(1);

  std::string format_name = "text";
  const std::map<std::string, OutputFormat> formats{
      {"text", OutputFormat::Text}, {"json", OutputFormat::Json}};
  app.add_option("--format", format_name, "Output format")
      ->check(CLI::IsMember({"text", "json"}));

  // search
  SearchOptions search;
  std::string config_search;
  std::uint64_t seed = 0;
  int episodes = 0;
  std::string out_dir;
  int stop_after = 0;
  auto* cmd_s = app.add_subcommand("search", "Run the Q-learning search");
  cmd_s->add_option("--config", config_search, "Run config (JSON)")->required();
  auto* seed_opt = cmd_s->add_option("--seed", seed, "Override qlearning.rng_seed");
  auto* episodes_opt = cmd_s->add_option("--episodes", episodes, "Override episode count");
  auto* out_opt = cmd_s->add_option("--out", out_dir, "Override output directory");
  cmd_s->add_flag("--resume", search.resume, "Continue from the checkpoint in the output directory");
  auto* stop_opt = cmd_s->add_option("--stop-after", stop_after,
                                     "Stop after this many episodes in total (checkpointed)");

  // validate
  std::string code_path, config_path;
  auto* cmd_v = app.add_subcommand("validate", "Check an architecture code");
  cmd_v->add_option("code", code_path, "File holding a canonical code")->required();
  cmd_v->add_option("--config", config_path, "Run config or catalog (JSON)");

  // decode
  std::string decode_code, decode_config;
  SignatureOverrides sig;
  int history_len = 0, horizon = 0, node_count = 0, feature_count = 0;
  auto* cmd_d = app.add_subcommand("decode", "Print the model graph JSON of a code");
  cmd_d->add_option("code", decode_code, "File holding a canonical code")->required();
  cmd_d->add_option("--config", decode_config, "Run config or catalog (JSON)");
  auto* hl = cmd_d->add_option("--history-len", history_len, "Input time steps");
  auto* hz = cmd_d->add_option("--horizon", horizon, "Predicted time steps");
  auto* nc = cmd_d->add_option("--node-count", node_count, "Vertices of the spatial network");
  auto* fc = cmd_d->add_option("--feature-count", feature_count, "Features per vertex");

  // space-size
  std::string size_config;
  auto* cmd_z = app.add_subcommand("space-size", "Count all architectures in a catalog");
  cmd_z->add_option("--config", size_config, "Run config or catalog (JSON)");

  // ablate
  std::string ablate_code, ablate_kind, ablate_spec, ablate_config;
  auto* cmd_a = app.add_subcommand("ablate", "Apply a structural ablation to a code");
  cmd_a->add_option("code", ablate_code, "File holding a canonical code")->required();
  cmd_a->add_option("--kind", ablate_kind,
                    "uniform | linearize | both | no-diversity | no-flexibility | single-source")
      ->required();
  auto* spec_opt = cmd_a->add_option("--spec", ablate_spec, "Block triple sipm,tipm,fes");
  cmd_a->add_option("--config", ablate_config, "Run config or catalog (JSON)");

  // replay
  std::string replay_log;
  auto* cmd_r = app.add_subcommand("replay", "Summarize an episodes.jsonl log");
  cmd_r->add_option("log", replay_log, "Path to episodes.jsonl")->required();

  for (auto* sub : {cmd_s, cmd_v, cmd_d, cmd_z, cmd_a, cmd_r}) {
    sub->add_option("--format", format_name, "Output format")
        ->check(CLI::IsMember({"text", "json"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code::kConfig;
  }
  const OutputFormat format = formats.at(format_name);
  auto optional_path = [](const std::string& p) {
    return p.empty() ? std::optional<std::filesystem::path>{}
                     : std::optional<std::filesystem::path>{p};
  };

  if (cmd_s->parsed()) {
    search.config_path = config_search;
    if (*seed_opt) search.seed = seed;
    if (*episodes_opt) search.episodes = episodes;
    if (*out_opt) search.out_dir = out_dir;
    if (*stop_opt) search.stop_after = stop_after;
    search.format = format;
    return cmd_search(search, std::cout, std::cerr);
  }
  if (cmd_v->parsed()) {
    return cmd_validate(code_path, optional_path(config_path), format, std::cout,
                        std::cerr);
  }
  if (cmd_d->parsed()) {
    if (*hl) sig.history_len = history_len;
    if (*hz) sig.horizon = horizon;
    if (*nc) sig.node_count = node_count;
    if (*fc) sig.feature_count = feature_count;
    return cmd_decode(decode_code, optional_path(decode_config), sig, std::cout,
                      std::cerr);
  }
  if (cmd_z->parsed()) {
    return cmd_space_size(optional_path(size_config), format, std::cout, std::cerr);
  }
  if (cmd_a->parsed()) {
    std::optional<std::string> spec;
    if (*spec_opt) spec = ablate_spec;
    return cmd_ablate(ablate_code, ablate_kind, spec, optional_path(ablate_config),
                      format, std::cout, std::cerr);
  }
  return cmd_replay(replay_log, format, std::cout, std::cerr);
}
