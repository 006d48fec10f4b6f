#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <string>

#include "autostgcn/qlearning.hpp"

namespace autostgcn {

enum class OutputFormat { Text, Json };

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kInvalid = 1;
inline constexpr int kConfig = 2;
inline constexpr int kEvaluator = 3;
}  // namespace exit_code

// File names written into the output directory of a search.
inline constexpr const char* kEpisodesFile = "episodes.jsonl";
inline constexpr const char* kQTableFile = "qtable.json";
inline constexpr const char* kBestGraphFile = "best.graph.json";
inline constexpr const char* kBestCodeFile = "best.code.txt";
inline constexpr const char* kSummaryFile = "summary.json";

struct SearchOptions {
  std::filesystem::path config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::optional<std::filesystem::path> out_dir;
  bool resume = false;
  // Stop (with a checkpoint) once this many episodes are complete.
  std::optional<int> stop_after;
  OutputFormat format = OutputFormat::Text;
};

struct SignatureOverrides {
  std::optional<int> history_len;
  std::optional<int> horizon;
  std::optional<int> node_count;
  std::optional<int> feature_count;
};

int cmd_search(const SearchOptions& opts, std::ostream& out, std::ostream& err);

int cmd_validate(const std::filesystem::path& code_path,
                 const std::optional<std::filesystem::path>& config_path,
                 OutputFormat format, std::ostream& out, std::ostream& err);

int cmd_decode(const std::filesystem::path& code_path,
               const std::optional<std::filesystem::path>& config_path,
               const SignatureOverrides& sig, std::ostream& out,
               std::ostream& err);

int cmd_space_size(const std::optional<std::filesystem::path>& config_path,
                   OutputFormat format, std::ostream& out, std::ostream& err);

// kind: uniform | linearize | both | no-diversity | no-flexibility |
// single-source. `spec` is "sipm,tipm,fes" for uniform and both.
int cmd_ablate(const std::filesystem::path& code_path, const std::string& kind,
               const std::optional<std::string>& spec,
               const std::optional<std::filesystem::path>& config_path,
               OutputFormat format, std::ostream& out, std::ostream& err);

// Re-renders the summary of a run from its episode log.
int cmd_replay(const std::filesystem::path& episodes_path, OutputFormat format,
               std::ostream& out, std::ostream& err);

struct LogSummary {
  std::optional<EpisodeRecord> best;
  int episodes = 0;
  int feasible_episodes = 0;
  int failed_episodes = 0;
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
};

LogSummary summarize_log(const std::vector<EpisodeRecord>& records);
// Reads at most max_records lines.
std::vector<EpisodeRecord> read_episode_log(
    const std::filesystem::path& path,
    std::size_t max_records = std::numeric_limits<std::size_t>::max());

}  // namespace autostgcn
