#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "autostgcn/random.hpp"

namespace autostgcn {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr int kSentinel = -1;
inline constexpr int kStartIndex = -2;
inline constexpr int kTrainingIndex = -1;
inline constexpr int kGlobalIndex = 0;

// Sizes of the complete option catalogs. Ordinals are 1-based.
inline constexpr int kNumInputStructures = 2;
inline constexpr int kNumSpatialMethods = 4;
inline constexpr int kNumTemporalMethods = 3;
inline constexpr int kNumEmbeddingStructures = 4;
inline constexpr int kNumOutputStructures = 3;
inline constexpr int kNumFusionMethods = 2;
inline constexpr int kNumLossFunctions = 2;
inline constexpr int kNumBatchSizes = 3;
inline constexpr int kNumLearningRates = 3;
inline constexpr int kNumOptimizers = 3;

inline constexpr std::array<int, 3> kFilterSizes{16, 32, 64};
inline constexpr std::array<int, 3> kBatchSizeValues{32, 50, 64};
inline constexpr std::array<double, 3> kLearningRateValues{1e-3, 7e-4, 1e-4};

// Ordinal (1..3) of a filter size; throws InvalidInput for other sizes.
int filter_size_ordinal(int filter_size);
int filter_size_value(int ordinal);

/// Which options the search may pick for each design parameter.
///
/// All lists hold 1-based ordinals into the complete catalogs except
/// `fsc_options`, which holds raw filter sizes (16, 32, 64). List order is
/// irrelevant to the search: successors are always generated in canonical
/// (sorted) order.
struct ParameterCatalog {
  int max_blocks = 4;
  std::vector<int> is_options{1, 2};
  std::vector<int> sipm_options{1, 2, 3, 4};
  std::vector<int> tipm_options{1, 2, 3};
  std::vector<int> fes_options{1, 2, 3, 4};
  std::vector<int> os_options{1, 2, 3};
  std::vector<int> fsc_options{16, 32, 64};
  std::vector<int> mbof_options{1, 2};
  std::vector<int> lf_options{1, 2};
  std::vector<int> bs_options{1, 2, 3};
  std::vector<int> ilr_options{1, 2, 3};
  std::vector<int> of_options{1, 2, 3};

  // One message per broken invariant; empty when the catalog is usable.
  std::vector<std::string> violations() const;
  // Throws InvalidInput("catalog", ...) if violations() is non-empty.
  void check() const;

  bool operator==(const ParameterCatalog&) const = default;
};

/// One 5-integer row: a state index followed by four option slots.
struct StateVector {
  int index = kStartIndex;
  std::array<int, 4> slots{kSentinel, kSentinel, kSentinel, kSentinel};

  bool is_start() const;
  // A block-level index whose slots are all sentinels.
  bool is_terminal() const;

  // Canonical text "i:a,b,c,d".
  std::string text() const;
  static StateVector parse(std::string_view text);

  static StateVector terminal(int index);

  auto operator<=>(const StateVector&) const = default;
};

/// Trajectory from the start state to a terminal state (or to block N).
struct ArchitectureCode {
  std::vector<StateVector> states;

  // Canonical text: state texts joined by ';'.
  std::string text() const;
  static ArchitectureCode parse(std::string_view text);

  // Number of non-terminal ST-block states.
  int block_count() const;
  // Number of actions taken (states.size() - 1).
  int transitions() const;

  auto operator<=>(const ArchitectureCode&) const = default;
};

struct TrainingConfig {
  int loss = 1;
  int batch_size = 1;
  int initial_lr = 1;
  int optimizer = 1;
  bool operator==(const TrainingConfig&) const = default;
};

struct GlobalConfig {
  int input_structure = 1;
  int output_structure = 1;
  int filter_size = 16;  // raw size, not an ordinal
  int fusion_method = 1;
  bool operator==(const GlobalConfig&) const = default;
};

struct BlockConfig {
  int sipm = 1;
  int tipm = 1;
  int fes = 1;
  int pred_index = 0;  // 0 = Stage-1 output, j = output of block j
  bool operator==(const BlockConfig&) const = default;
};

struct StructuredConfig {
  TrainingConfig training;
  GlobalConfig global;
  std::vector<BlockConfig> blocks;
  bool operator==(const StructuredConfig&) const = default;
};

struct Violation {
  std::size_t position = 0;  // offset of the offending state in the code
  int state_index = 0;
  std::string rule;
  std::string message;
};

std::string to_string(const Violation& v);

StateVector start_state();

// Violations of a single state in isolation (position is left at 0).
std::vector<Violation> validate_state(const StateVector& s,
                                      const ParameterCatalog& catalog);

// Every legal successor of `s`, sorted lexicographically.
// Throws TerminalState for terminal `s`, IndexOutOfRange once index == N.
std::vector<StateVector> action_space(const StateVector& s,
                                      const ParameterCatalog& catalog);

std::vector<Violation> validate_code(const ArchitectureCode& code,
                                     const ParameterCatalog& catalog);

ArchitectureCode encode(const StructuredConfig& cfg,
                        const ParameterCatalog& catalog);
StructuredConfig decode(const ArchitectureCode& code,
                        const ParameterCatalog& catalog);

// Uniform block count in 1..N, then uniform options for every slot.
ArchitectureCode random_code(const ParameterCatalog& catalog, Rng& rng);
ArchitectureCode random_code(const ParameterCatalog& catalog,
                             std::uint64_t seed);

// |training| * |global| * sum_{k=1..N} prod_{i=1..k} (|SIPM||TIPM||FES| * i)
BigInt space_size(const ParameterCatalog& catalog);

}  // namespace autostgcn
