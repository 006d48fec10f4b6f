#include <doctest.h>

#include <json.hpp>
#include <set>

#include "autostgcn/errors.hpp"
#include "autostgcn/graph_builder.hpp"

using namespace autostgcn;

namespace {

// Code with the given PBIndex per block; every block uses options (1,1,1).
ArchitectureCode with_preds(const std::vector<int>& preds, int mbof = 1) {
  StructuredConfig cfg;
  cfg.global.fusion_method = mbof;
  for (int p : preds) cfg.blocks.push_back({1, 1, 1, p});
  return encode(cfg, ParameterCatalog{});
}

std::set<std::pair<int, int>> edge_set(const ModelGraph& g) {
  return {g.edges.begin(), g.edges.end()};
}

// Independent statement of the wiring rule.
std::set<std::pair<int, int>> expected_edges(const StructuredConfig& cfg) {
  const int k = static_cast<int>(cfg.blocks.size());
  std::set<std::pair<int, int>> edges;
  std::vector<bool> feeds(k + 1, false);
  for (int i = 1; i <= k; ++i) {
    const int p = cfg.blocks[i - 1].pred_index;
    edges.insert({p, i});
    feeds[p] = true;
  }
  std::vector<int> sink_ids;
  for (int i = 1; i <= k; ++i) {
    if (!feeds[i]) sink_ids.push_back(i);
  }
  if (sink_ids.size() == 1) {
    edges.insert({sink_ids[0], k + 1});
  } else {
    for (int s : sink_ids) edges.insert({s, k + 1});
    edges.insert({k + 1, k + 2});
  }
  return edges;
}

}  // namespace

TEST_CASE("chain has no fusion node") {
  const auto g = build_graph(with_preds({0, 1, 2}), ParameterCatalog{}, {});
  CHECK(g.nodes.size() == 5);
  CHECK_FALSE(g.fusion.has_value());
  CHECK(edge_set(g) == std::set<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  CHECK(g.nodes.back().kind == NodeKind::Output);
  CHECK(validate_graph(g).empty());
}

TEST_CASE("two sinks are fused") {
  const auto g = build_graph(with_preds({0, 0, 1}), ParameterCatalog{}, {});
  CHECK(sinks(g) == std::vector<int>{2, 3});
  REQUIRE(g.fusion.has_value());
  CHECK(*g.fusion == FusionMethod::Add);
  const int fusion_id = 4;
  CHECK(g.nodes[fusion_id].kind == NodeKind::Fusion);
  int in_edges = 0;
  for (const auto& [from, to] : g.edges) in_edges += to == fusion_id;
  CHECK(in_edges == 2);
  CHECK(edge_set(g).count({fusion_id, 5}));
  CHECK(validate_graph(g).empty());
  CHECK(build_graph(with_preds({0, 0, 1}, 2), ParameterCatalog{}, {}).fusion ==
        FusionMethod::Concat);
}

TEST_CASE("single block") {
  const auto g = build_graph(with_preds({0}), ParameterCatalog{}, {});
  CHECK(edge_set(g) == std::set<std::pair<int, int>>{{0, 1}, {1, 2}});
  CHECK(sinks(g) == std::vector<int>{1});
}

TEST_CASE("sinks") {
  CHECK(sinks(build_graph(with_preds({0, 1, 2, 3}), ParameterCatalog{}, {})) ==
        std::vector<int>{4});
  CHECK(sinks(build_graph(with_preds({0, 0, 0}), ParameterCatalog{}, {})) ==
        std::vector<int>{1, 2, 3});
}

TEST_CASE("node attributes and training spec") {
  StructuredConfig cfg;
  cfg.training = {2, 2, 3, 1};
  cfg.global = {1, 3, 64, 1};
  cfg.blocks = {{4, 3, 2, 0}};
  const auto g = build_graph(encode(cfg, ParameterCatalog{}), ParameterCatalog{},
                             {24, 6, 170, 2});
  CHECK(g.nodes[1].sipm == 4);
  CHECK(g.nodes[1].tipm == 3);
  CHECK(g.nodes[1].fes == 2);
  CHECK(g.nodes[1].filter_size == 64);
  CHECK_FALSE(g.nodes[0].sipm.has_value());
  CHECK(g.training == TrainingSpec{"huber", 50, 1e-4, "rmsprop_step_decay"});
  CHECK(g.input_structure == 1);
  CHECK(g.output_structure == 3);
  CHECK(g.signature == ProblemSignature{24, 6, 170, 2});
}

TEST_CASE("invalid inputs") {
  auto code = with_preds({0, 1});
  code.states[4].slots[3] = 2;
  CHECK_THROWS_AS(build_graph(code, ParameterCatalog{}, {}), InvalidCode);
  CHECK_THROWS_AS(ProblemSignature({0, 12, 358, 1}).check(), InvalidInput);
}

TEST_CASE("validate_graph catches structural faults") {
  const auto good = build_graph(with_preds({0, 0, 1}), ParameterCatalog{}, {});
  SUBCASE("cycle") {
    auto g = good;
    g.edges.push_back({3, 1});
    CHECK_FALSE(validate_graph(g).empty());
  }
  SUBCASE("missing fusion") {
    auto g = good;
    g.fusion.reset();
    CHECK_FALSE(validate_graph(g).empty());
  }
  SUBCASE("unreachable block") {
    auto g = good;
    std::erase(g.edges, std::pair<int, int>{0, 2});
    CHECK_FALSE(validate_graph(g).empty());
  }
  SUBCASE("dangling edge") {
    auto g = good;
    g.edges.push_back({1, 99});
    CHECK_FALSE(validate_graph(g).empty());
  }
  SUBCASE("block without attributes") {
    auto g = good;
    g.nodes[2].fes.reset();
    CHECK_FALSE(validate_graph(g).empty());
  }
}

TEST_CASE("random codes give valid graphs with the expected edges") {
  const ParameterCatalog full;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto code = random_code(full, seed);
    const auto g = build_graph(code, full, {});
    REQUIRE(validate_graph(g).empty());
    const auto cfg = decode(code, full);
    REQUIRE(edge_set(g) == expected_edges(cfg));
    REQUIRE(g.block_count() == static_cast<int>(cfg.blocks.size()));
    REQUIRE(g.fusion.has_value() == (sinks(g).size() >= 2));
  }
}

TEST_CASE("json is canonical and round-trips") {
  const ParameterCatalog full;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto g = build_graph(random_code(full, seed), full, {});
    const auto text = to_json(g);
    REQUIRE(text == to_json(build_graph(random_code(full, seed), full, {})));
    const auto back = graph_from_json(text);
    REQUIRE(back == g);
    REQUIRE(to_json(back) == text);
  }
  const auto chain = nlohmann::json::parse(to_json(build_graph(with_preds({0, 1}), full, {})));
  CHECK(chain.at("fusion").is_null());
  CHECK(chain.at("nodes").size() == 4);
  CHECK(chain.at("nodes")[1].at("kind") == "st_block");
  CHECK(chain.at("edges")[0] == nlohmann::json::array({0, 1}));
  CHECK(chain.at("signature").at("node_count") == 358);
  CHECK(chain.at("training").at("optimizer").is_string());
}

TEST_CASE("graph_from_json rejects bad documents") {
  CHECK_THROWS_AS(graph_from_json("not json"), InvalidInput);
  CHECK_THROWS_AS(graph_from_json("{}"), InvalidInput);
  auto j = nlohmann::json::parse(to_json(build_graph(with_preds({0, 0}), ParameterCatalog{}, {})));
  j["fusion"] = nullptr;
  CHECK_THROWS_AS(graph_from_json(j.dump()), InvalidInput);
}

TEST_CASE("ablations") {
  const ParameterCatalog full;
  StructuredConfig cfg;
  cfg.blocks = {{2, 2, 4, 0}, {2, 2, 1, 1}, {1, 3, 3, 1}};
  const auto code = encode(cfg, full);

  const auto lin = decode(apply_ablation(code, Ablation::linearize(), full), full);
  CHECK(lin.blocks[0].pred_index == 0);
  CHECK(lin.blocks[1].pred_index == 1);
  CHECK(lin.blocks[2].pred_index == 2);
  CHECK(lin.blocks[2].fes == 3);

  const auto uni = decode(apply_ablation(code, Ablation::uniform_blocks({2, 2, 3}), full), full);
  for (const auto& b : uni.blocks) {
    CHECK(b.sipm == 2);
    CHECK(b.tipm == 2);
    CHECK(b.fes == 3);
  }
  CHECK(uni.blocks[2].pred_index == 1);

  const auto both = decode(apply_ablation(code, Ablation::both({3, 2, 4}), full), full);
  CHECK(both.blocks[2].pred_index == 2);
  CHECK(both.blocks[1].fes == 4);
  CHECK(both.training == cfg.training);
  CHECK(both.global == cfg.global);

  SUBCASE("idempotent and valid") {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
      const auto c = random_code(full, seed);
      for (const auto& a : {Ablation::linearize(), Ablation::uniform_blocks({1, 2, 3}),
                            Ablation::both({4, 1, 2})}) {
        const auto once = apply_ablation(c, a, full);
        REQUIRE(validate_code(once, full).empty());
        REQUIRE(apply_ablation(once, a, full) == once);
        REQUIRE(once.states.size() == c.states.size());
      }
    }
  }
  SUBCASE("spec outside the catalog") {
    CHECK_THROWS_AS(apply_ablation(code, Ablation::uniform_blocks({5, 1, 1}), full), InvalidSpec);
    ParameterCatalog narrow = full;
    narrow.fes_options = {1, 2, 3, 4};
    narrow.tipm_options = {1, 2};
    CHECK_THROWS_AS(apply_ablation(code, Ablation::both({1, 3, 1}), narrow), InvalidCode);
  }
}
