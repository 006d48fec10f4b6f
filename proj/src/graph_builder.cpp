#include "autostgcn/graph_builder.hpp"

#include <algorithm>
#include <deque>

#include <json.hpp>

#include "autostgcn/errors.hpp"

namespace autostgcn {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 2> kLossNames{"mse", "huber"};
constexpr std::array<const char*, 3> kOptimizerNames{
    "rmsprop_step_decay", "adam", "adam_poly"};

json optional_int(const std::optional<int>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<int> read_optional_int(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<int>();
}

NodeKind kind_from_string(const std::string& s) {
  if (s == "input") return NodeKind::Input;
  if (s == "st_block") return NodeKind::Block;
  if (s == "fusion") return NodeKind::Fusion;
  if (s == "output") return NodeKind::Output;
  throw InvalidInput("graph_schema", "unknown node kind '" + s + "'");
}

bool in_options(const std::vector<int>& options, int v) {
  return std::find(options.begin(), options.end(), v) != options.end();
}

}  // namespace

void ProblemSignature::check() const {
  if (history_len <= 0 || horizon <= 0 || node_count <= 0 ||
      feature_count <= 0) {
    throw InvalidInput("signature", "all signature fields must be positive");
  }
}

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Input:
      return "input";
    case NodeKind::Block:
      return "st_block";
    case NodeKind::Fusion:
      return "fusion";
    case NodeKind::Output:
      return "output";
  }
  return "unknown";
}

TrainingSpec training_spec(const TrainingConfig& cfg) {
  auto at = [](auto& table, int ordinal) {
    if (ordinal < 1 || ordinal > static_cast<int>(table.size())) {
      throw InvalidInput("catalog_member",
                         "training ordinal " + std::to_string(ordinal));
    }
    return table[static_cast<std::size_t>(ordinal - 1)];
  };
  return TrainingSpec{at(kLossNames, cfg.loss),
                      at(kBatchSizeValues, cfg.batch_size),
                      at(kLearningRateValues, cfg.initial_lr),
                      at(kOptimizerNames, cfg.optimizer)};
}

int ModelGraph::block_count() const {
  return static_cast<int>(
      std::count_if(nodes.begin(), nodes.end(),
                    [](const GraphNode& n) { return n.kind == NodeKind::Block; }));
}

ModelGraph build_graph(const ArchitectureCode& code,
                       const ParameterCatalog& catalog,
                       const ProblemSignature& sig) {
  const auto violations = validate_code(code, catalog);
  if (!violations.empty()) throw InvalidCode(to_string(violations.front()));
  sig.check();

  const StructuredConfig cfg = decode(code, catalog);
  const int k = static_cast<int>(cfg.blocks.size());

  ModelGraph g;
  g.signature = sig;
  g.training = training_spec(cfg.training);
  g.input_structure = cfg.global.input_structure;
  g.output_structure = cfg.global.output_structure;

  g.nodes.push_back(GraphNode{0, NodeKind::Input, {}, {}, {}, {}});
  std::vector<bool> has_successor(static_cast<std::size_t>(k) + 1, false);
  for (int i = 1; i <= k; ++i) {
    const auto& b = cfg.blocks[static_cast<std::size_t>(i - 1)];
    g.nodes.push_back(GraphNode{i, NodeKind::Block, b.sipm, b.tipm, b.fes,
                                cfg.global.filter_size});
    g.edges.emplace_back(b.pred_index, i);
    if (b.pred_index > 0) has_successor[static_cast<std::size_t>(b.pred_index)] = true;
  }

  std::vector<int> sink_ids;
  for (int i = 1; i <= k; ++i) {
    if (!has_successor[static_cast<std::size_t>(i)]) sink_ids.push_back(i);
  }
  if (sink_ids.size() >= 2) {
    const int fusion_id = k + 1;
    const int output_id = k + 2;
    g.fusion = cfg.global.fusion_method == 1 ? FusionMethod::Add
                                             : FusionMethod::Concat;
    g.nodes.push_back(GraphNode{fusion_id, NodeKind::Fusion, {}, {}, {}, {}});
    g.nodes.push_back(GraphNode{output_id, NodeKind::Output, {}, {}, {}, {}});
    for (int s : sink_ids) g.edges.emplace_back(s, fusion_id);
    g.edges.emplace_back(fusion_id, output_id);
  } else {
    const int output_id = k + 1;
    g.nodes.push_back(GraphNode{output_id, NodeKind::Output, {}, {}, {}, {}});
    g.edges.emplace_back(sink_ids.front(), output_id);
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

std::vector<int> sinks(const ModelGraph& g) {
  std::vector<bool> is_block(g.nodes.size(), false);
  for (const auto& n : g.nodes) {
    if (n.kind == NodeKind::Block && n.id >= 0 &&
        static_cast<std::size_t>(n.id) < is_block.size()) {
      is_block[static_cast<std::size_t>(n.id)] = true;
    }
  }
  auto block = [&](int id) {
    return id >= 0 && static_cast<std::size_t>(id) < is_block.size() &&
           is_block[static_cast<std::size_t>(id)];
  };
  std::vector<bool> feeds_block(g.nodes.size(), false);
  for (const auto& [from, to] : g.edges) {
    if (block(from) && block(to)) feeds_block[static_cast<std::size_t>(from)] = true;
  }
  std::vector<int> out;
  for (const auto& n : g.nodes) {
    if (n.kind == NodeKind::Block && !feeds_block[static_cast<std::size_t>(n.id)]) {
      out.push_back(n.id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> validate_graph(const ModelGraph& g) {
  std::vector<std::string> out;
  const int n = static_cast<int>(g.nodes.size());
  if (n < 3) {
    out.push_back("graph needs an input, at least one ST-block and an output");
    return out;
  }
  for (int i = 0; i < n; ++i) {
    if (g.nodes[static_cast<std::size_t>(i)].id != i) {
      out.push_back("node ids must equal their position");
      return out;
    }
  }
  if (g.nodes.front().kind != NodeKind::Input) out.push_back("node 0 must be the input");
  if (g.nodes.back().kind != NodeKind::Output) out.push_back("last node must be the output");

  int inputs = 0, outputs = 0, fusions = 0, k = 0;
  for (const auto& node : g.nodes) {
    switch (node.kind) {
      case NodeKind::Input:
        ++inputs;
        break;
      case NodeKind::Output:
        ++outputs;
        break;
      case NodeKind::Fusion:
        ++fusions;
        break;
      case NodeKind::Block:
        ++k;
        if (node.id != k) out.push_back("ST-block ids must be 1..k");
        if (!node.sipm || !node.tipm || !node.fes || !node.filter_size) {
          out.push_back("ST-block " + std::to_string(node.id) +
                        " lacks sipm/tipm/fes/filter_size");
        }
        break;
    }
    if (node.kind != NodeKind::Block &&
        (node.sipm || node.tipm || node.fes || node.filter_size)) {
      out.push_back("node " + std::to_string(node.id) +
                    " is not an ST-block but carries block attributes");
    }
  }
  if (inputs != 1) out.push_back("exactly one input node required");
  if (outputs != 1) out.push_back("exactly one output node required");
  if (fusions > 1) out.push_back("at most one fusion node allowed");
  if (k < 1) out.push_back("at least one ST-block required");
  if (fusions == 1 && g.nodes[static_cast<std::size_t>(k + 1)].kind != NodeKind::Fusion) {
    out.push_back("fusion node must have id k+1");
  }
  if (!out.empty()) return out;

  if (!std::is_sorted(g.edges.begin(), g.edges.end()) ||
      std::adjacent_find(g.edges.begin(), g.edges.end()) != g.edges.end()) {
    out.push_back("edges must be sorted and unique");
  }
  std::vector<std::vector<int>> succ(static_cast<std::size_t>(n));
  std::vector<int> indegree(static_cast<std::size_t>(n), 0);
  std::vector<int> block_parents(static_cast<std::size_t>(n), 0);
  for (const auto& [from, to] : g.edges) {
    if (from < 0 || from >= n || to < 0 || to >= n || from == to) {
      out.push_back("edge (" + std::to_string(from) + "," + std::to_string(to) +
                    ") is invalid");
      return out;
    }
    succ[static_cast<std::size_t>(from)].push_back(to);
    ++indegree[static_cast<std::size_t>(to)];
    if (g.nodes[static_cast<std::size_t>(to)].kind == NodeKind::Block) {
      const auto fk = g.nodes[static_cast<std::size_t>(from)].kind;
      if (fk != NodeKind::Input && fk != NodeKind::Block) {
        out.push_back("ST-block " + std::to_string(to) +
                      " must read from the input or an ST-block");
      }
      ++block_parents[static_cast<std::size_t>(to)];
    }
  }
  for (int i = 1; i <= k; ++i) {
    if (block_parents[static_cast<std::size_t>(i)] != 1) {
      out.push_back("ST-block " + std::to_string(i) + " must have exactly one input");
    }
  }

  // Kahn's algorithm for acyclicity.
  {
    auto deg = indegree;
    std::deque<int> ready;
    for (int i = 0; i < n; ++i) {
      if (deg[static_cast<std::size_t>(i)] == 0) ready.push_back(i);
    }
    int visited = 0;
    while (!ready.empty()) {
      const int u = ready.front();
      ready.pop_front();
      ++visited;
      for (int v : succ[static_cast<std::size_t>(u)]) {
        if (--deg[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
      }
    }
    if (visited != n) out.push_back("graph contains a cycle");
  }

  // Forward reachability from Input, backward from Output.
  auto reach = [&](int root, bool forward) {
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::vector<int> stack{root};
    seen[static_cast<std::size_t>(root)] = true;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (const auto& [from, to] : g.edges) {
        const int a = forward ? from : to;
        const int b = forward ? to : from;
        if (a == u && !seen[static_cast<std::size_t>(b)]) {
          seen[static_cast<std::size_t>(b)] = true;
          stack.push_back(b);
        }
      }
    }
    return seen;
  };
  const auto from_input = reach(0, true);
  const auto to_output = reach(n - 1, false);
  for (int i = 1; i < n - 1; ++i) {
    if (!from_input[static_cast<std::size_t>(i)] ||
        !to_output[static_cast<std::size_t>(i)]) {
      out.push_back("node " + std::to_string(i) +
                    " is not on a path from input to output");
    }
  }

  const auto sink_ids = sinks(g);
  const bool want_fusion = sink_ids.size() >= 2;
  if (want_fusion != (fusions == 1)) {
    out.push_back("fusion node must exist iff at least two ST-blocks are sinks");
  }
  if (g.fusion.has_value() != (fusions == 1)) {
    out.push_back("fusion method must be set iff a fusion node exists");
  }
  if (g.input_structure < 1 || g.input_structure > kNumInputStructures) {
    out.push_back("input_structure out of range");
  }
  if (g.output_structure < 1 || g.output_structure > kNumOutputStructures) {
    out.push_back("output_structure out of range");
  }
  if (g.signature.history_len <= 0 || g.signature.horizon <= 0 ||
      g.signature.node_count <= 0 || g.signature.feature_count <= 0) {
    out.push_back("signature fields must be positive");
  }
  return out;
}

std::string to_json(const ModelGraph& g) {
  json j;
  j["signature"] = {{"history_len", g.signature.history_len},
                    {"horizon", g.signature.horizon},
                    {"node_count", g.signature.node_count},
                    {"feature_count", g.signature.feature_count}};
  j["training"] = {{"loss", g.training.loss},
                   {"batch_size", g.training.batch_size},
                   {"initial_lr", g.training.initial_lr},
                   {"optimizer", g.training.optimizer}};
  json nodes = json::array();
  for (const auto& node : g.nodes) {
    nodes.push_back({{"id", node.id},
                     {"kind", std::string(to_string(node.kind))},
                     {"sipm", optional_int(node.sipm)},
                     {"tipm", optional_int(node.tipm)},
                     {"fes", optional_int(node.fes)},
                     {"filter_size", optional_int(node.filter_size)}});
  }
  j["nodes"] = std::move(nodes);
  json edges = json::array();
  for (const auto& [from, to] : g.edges) edges.push_back({from, to});
  j["edges"] = std::move(edges);
  if (g.fusion) {
    j["fusion"] = *g.fusion == FusionMethod::Add ? "add" : "concat";
  } else {
    j["fusion"] = nullptr;
  }
  j["input_structure"] = g.input_structure;
  j["output_structure"] = g.output_structure;
  return j.dump();
}

ModelGraph graph_from_json(std::string_view text) {
  ModelGraph g;
  try {
    const json j = json::parse(text);
    const auto& s = j.at("signature");
    g.signature = {s.at("history_len").get<int>(), s.at("horizon").get<int>(),
                   s.at("node_count").get<int>(),
                   s.at("feature_count").get<int>()};
    const auto& t = j.at("training");
    g.training = {t.at("loss").get<std::string>(), t.at("batch_size").get<int>(),
                  t.at("initial_lr").get<double>(),
                  t.at("optimizer").get<std::string>()};
    for (const auto& node : j.at("nodes")) {
      g.nodes.push_back(GraphNode{node.at("id").get<int>(),
                                  kind_from_string(node.at("kind").get<std::string>()),
                                  read_optional_int(node, "sipm"),
                                  read_optional_int(node, "tipm"),
                                  read_optional_int(node, "fes"),
                                  read_optional_int(node, "filter_size")});
    }
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) {
        throw InvalidInput("graph_schema", "edges must be [from,to] pairs");
      }
      g.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    const auto& f = j.at("fusion");
    if (f.is_null()) {
      g.fusion.reset();
    } else if (f == "add") {
      g.fusion = FusionMethod::Add;
    } else if (f == "concat") {
      g.fusion = FusionMethod::Concat;
    } else {
      throw InvalidInput("graph_schema", "fusion must be add, concat or null");
    }
    g.input_structure = j.at("input_structure").get<int>();
    g.output_structure = j.at("output_structure").get<int>();
  } catch (const json::exception& e) {
    throw InvalidInput("graph_schema", e.what());
  }
  const auto problems = validate_graph(g);
  if (!problems.empty()) throw InvalidInput("graph_invariant", problems.front());
  return g;
}

ArchitectureCode apply_ablation(const ArchitectureCode& code,
                                const Ablation& ablation,
                                const ParameterCatalog& catalog) {
  const auto violations = validate_code(code, catalog);
  if (!violations.empty()) throw InvalidCode(to_string(violations.front()));

  const bool uniform = ablation.kind != Ablation::Kind::Linearize;
  const bool linear = ablation.kind != Ablation::Kind::UniformBlocks;
  if (uniform) {
    const auto& t = ablation.triple;
    if (!in_options(catalog.sipm_options, t.sipm) ||
        !in_options(catalog.tipm_options, t.tipm) ||
        !in_options(catalog.fes_options, t.fes)) {
      throw InvalidSpec("block triple (" + std::to_string(t.sipm) + "," +
                        std::to_string(t.tipm) + "," + std::to_string(t.fes) +
                        ") is outside the catalog");
    }
  }

  ArchitectureCode out = code;
  for (auto& s : out.states) {
    if (s.index < 1 || s.is_terminal()) continue;
    if (uniform) {
      s.slots[0] = ablation.triple.sipm;
      s.slots[1] = ablation.triple.tipm;
      s.slots[2] = ablation.triple.fes;
    }
    if (linear) s.slots[3] = s.index - 1;
  }
  return out;
}

}  // namespace autostgcn
