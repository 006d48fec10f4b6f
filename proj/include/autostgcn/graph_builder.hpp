#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "autostgcn/search_space.hpp"

namespace autostgcn {

/// Shape metadata of the forecasting task. Carried on the graph, never
/// propagated through operators.
struct ProblemSignature {
  int history_len = 12;
  int horizon = 12;
  int node_count = 358;
  int feature_count = 1;

  void check() const;
  bool operator==(const ProblemSignature&) const = default;
};

enum class NodeKind { Input, Block, Fusion, Output };

std::string_view to_string(NodeKind kind);

struct GraphNode {
  int id = 0;
  NodeKind kind = NodeKind::Input;
  // Set only for ST-block nodes.
  std::optional<int> sipm;
  std::optional<int> tipm;
  std::optional<int> fes;
  std::optional<int> filter_size;

  bool operator==(const GraphNode&) const = default;
};

enum class FusionMethod { Add, Concat };

/// Concrete training settings (values, not ordinals).
struct TrainingSpec {
  std::string loss;       // "mse" | "huber"
  int batch_size = 0;     // 32 | 50 | 64
  double initial_lr = 0;  // 1e-3 | 7e-4 | 1e-4
  std::string optimizer;  // "rmsprop_step_decay" | "adam" | "adam_poly"

  bool operator==(const TrainingSpec&) const = default;
};

TrainingSpec training_spec(const TrainingConfig& cfg);

/// Symbolic DAG of one candidate model.
///
/// Node ids: Input = 0, ST-blocks = 1..k in code order, Fusion = k + 1 when
/// present, Output = last. Edges are kept sorted.
struct ModelGraph {
  std::vector<GraphNode> nodes;
  std::vector<std::pair<int, int>> edges;
  TrainingSpec training;
  ProblemSignature signature;
  std::optional<FusionMethod> fusion;
  int input_structure = 2;
  int output_structure = 2;

  int block_count() const;
  int output_id() const { return nodes.empty() ? -1 : nodes.back().id; }

  bool operator==(const ModelGraph&) const = default;
};

// Throws InvalidCode when the code fails validation under `catalog`.
ModelGraph build_graph(const ArchitectureCode& code,
                       const ParameterCatalog& catalog,
                       const ProblemSignature& sig);

// ST-block ids with no ST-block successor, ascending.
std::vector<int> sinks(const ModelGraph& g);

// Structural checks: ids, acyclicity, reachability, fusion iff >= 2 sinks.
std::vector<std::string> validate_graph(const ModelGraph& g);

// Canonical JSON: sorted keys, compact, stable across calls.
std::string to_json(const ModelGraph& g);
// Throws InvalidInput on malformed or structurally invalid documents.
ModelGraph graph_from_json(std::string_view text);

struct BlockTriple {
  int sipm = 1;
  int tipm = 1;
  int fes = 1;
};

struct Ablation {
  enum class Kind { UniformBlocks, Linearize, Both };
  Kind kind = Kind::Linearize;
  BlockTriple triple;  // ignored for Linearize

  static Ablation uniform_blocks(BlockTriple t) {
    return {Kind::UniformBlocks, t};
  }
  static Ablation linearize() { return {Kind::Linearize, {}}; }
  static Ablation both(BlockTriple t) { return {Kind::Both, t}; }
};

// Rewrites block structure and/or wiring. Throws InvalidSpec if the triple
// is outside `catalog`, InvalidCode if `code` is invalid.
ArchitectureCode apply_ablation(const ArchitectureCode& code,
                                const Ablation& ablation,
                                const ParameterCatalog& catalog);

}  // namespace autostgcn
