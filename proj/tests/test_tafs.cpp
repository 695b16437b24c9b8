#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tars/milp.hpp"
#include "tars/tafs.hpp"

using namespace tars;

namespace {

// Single flow on a single 7-node chain; the delta row is then overwritten
// with hand numbers where a test needs exact arithmetic.
PlacementInstance chain_instance() {
  std::string topo;
  for (int i = 0; i < 7; ++i) topo += "node " + std::to_string(i) + " n" + std::to_string(i) + "\n";
  for (int i = 0; i < 6; ++i)
    topo += "link " + std::to_string(i) + " " + std::to_string(i + 1) + " 100 3 0.05\n";
  NetworkGraph g = load_plain(topo);
  GeneratorConfig cfg;
  cfg.seed = 50;
  cfg.flows_per_pair = 1;
  cfg.k_paths = 1;
  PlacementInstance inst = generate_instance(g, cfg);
  // Keep the 0 -> 6 flow only (pair index 5 among (0,1)..(0,6)).
  PlacementInstance one = inst;
  one.flows = {inst.flows[5]};
  one.flows[0].id = 0;
  one.paths = {inst.paths[5]};
  one.delta = {inst.delta[5]};
  REQUIRE(one.flows[0].src == 0);
  REQUIRE(one.flows[0].dst == 6);
  return one;
}

PlacementInstance square_instance(std::uint64_t seed, int flows_per_pair = 1) {
  NetworkGraph g = load_plain(
      "node 0 a\nnode 1 b\nnode 2 c\nnode 3 d\n"
      "link 0 1 60 2 0.02\nlink 1 2 60 2 0.03\nlink 2 3 60 2 0.02\nlink 0 3 60 5 0.04\n");
  GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.flows_per_pair = flows_per_pair;
  cfg.k_paths = 3;
  cfg.capacity_range = {6, 14};
  cfg.bw_range = {1, 5};
  return generate_instance(g, cfg);
}

}  // namespace

TEST_CASE("benefit1 reproduces the fixed-input arithmetic") {
  PlacementInstance inst = chain_instance();
  // Positions: [n0..n6, no-TA]; place the known values.
  auto& row = inst.delta[0][0];
  row.assign(8, 60.0);
  row[3] = 54.01;
  row.back() = 72.2;
  CHECK(benefit1(inst, 0, 0, 3) == doctest::Approx(18.19).epsilon(1e-12));
  CHECK(benefit1(inst, 0, 0, inst.graph.fictive_id()) == 0.0);
}

TEST_CASE("benefit1 is zero everywhere on a lossless path") {
  NetworkGraph g = load_plain(
      "node 0 a\nnode 1 b\nnode 2 c\nlink 0 1 100 4 0\nlink 1 2 100 4 0\n");
  GeneratorConfig cfg;
  cfg.seed = 1;
  cfg.flows_per_pair = 1;
  cfg.loss_range = {0, 0};
  PlacementInstance inst = generate_instance(g, cfg);
  for (int f = 0; f < inst.flow_count(); ++f)
    for (size_t p = 0; p < inst.paths[f].size(); ++p)
      for (int node : inst.paths[f][p].node_seq)
        CHECK(benefit1(inst, f, static_cast<int>(p), node) == 0.0);
}

TEST_CASE("benefit2 reproduces the penalty arithmetic and clamps") {
  PlacementInstance inst = chain_instance();
  auto& row = inst.delta[0][0];
  row.assign(8, 60.0);
  row[3] = 54.01;
  row.back() = 72.2;
  inst.flows[0].sla_ms = 60.0;
  inst.flows[0].penalty_per_ms = 5e-5;
  // theta * (72.2 - 60) - theta * 0 = 6.1e-4
  CHECK(benefit2(inst, 0, 0, 3) == doctest::Approx(6.1e-4).epsilon(1e-9));

  // Both delays under the bound: no penalty on either side.
  inst.flows[0].sla_ms = 100.0;
  CHECK(benefit2(inst, 0, 0, 3) == 0.0);

  // A placement worse than no TA clamps to zero.
  inst.flows[0].sla_ms = 50.0;
  row[3] = 80.0;  // worse than 72.2
  CHECK(benefit2(inst, 0, 0, 3) == 0.0);
}

TEST_CASE("node ranking puts the star hub first") {
  // Star: node 0 is the hub; every leaf-to-leaf path crosses it.
  std::string topo = "node 0 hub\n";
  for (int i = 1; i <= 4; ++i) topo += "node " + std::to_string(i) + " leaf\n";
  for (int i = 1; i <= 4; ++i) topo += "link 0 " + std::to_string(i) + " 100 3 0.05\n";
  NetworkGraph g = load_plain(topo);
  GeneratorConfig cfg;
  cfg.seed = 2;
  cfg.flows_per_pair = 1;
  PlacementInstance inst = generate_instance(g, cfg);

  auto ranked = rank_ta_nodes(inst, TafsVariant::Tafs1);
  CHECK(ranked.front() == 0);

  // Brute-force the per-pair averages independently.
  std::vector<double> sum(5, 0.0);
  std::vector<int> cnt(5, 0);
  for (int f = 0; f < inst.flow_count(); ++f)
    for (size_t p = 0; p < inst.paths[f].size(); ++p)
      for (int n : inst.paths[f][p].node_seq) {
        sum[n] += inst.delta[f][p].back() - inst.delta_of(f, static_cast<int>(p), n);
        ++cnt[n];
      }
  std::vector<double> avg(5, 0.0);
  for (int n = 0; n < 5; ++n) avg[n] = cnt[n] ? sum[n] / cnt[n] : 0.0;
  for (size_t i = 1; i < ranked.size(); ++i) {
    bool ok = avg[ranked[i - 1]] > avg[ranked[i]] ||
              (avg[ranked[i - 1]] == avg[ranked[i]] && ranked[i - 1] < ranked[i]);
    CHECK(ok);
  }
}

TEST_CASE("a lossless network ranks nodes by id") {
  NetworkGraph g = load_plain(
      "node 0 a\nnode 1 b\nnode 2 c\nlink 0 1 100 4 0\nlink 1 2 100 4 0\nlink 0 2 100 9 0\n");
  GeneratorConfig cfg;
  cfg.seed = 3;
  cfg.flows_per_pair = 1;
  cfg.loss_range = {0, 0};
  PlacementInstance inst = generate_instance(g, cfg);
  CHECK(rank_ta_nodes(inst, TafsVariant::Tafs1) == std::vector<int>{0, 1, 2});
  CHECK(rank_ta_nodes(inst, TafsVariant::Tafs2) == std::vector<int>{0, 1, 2});
}

TEST_CASE("symmetric nodes tie and break by id") {
  // Two equal-attribute routes 0-1-3 / 0-2-3: nodes 1 and 2 are symmetric.
  NetworkGraph g = load_plain(
      "node 0 s\nnode 1 a\nnode 2 b\nnode 3 d\n"
      "link 0 1 100 2 0.05\nlink 1 3 100 2 0.05\nlink 0 2 100 2 0.05\nlink 2 3 100 2 0.05\n");
  GeneratorConfig cfg;
  cfg.seed = 4;
  cfg.flows_per_pair = 1;
  cfg.k_paths = 4;
  PlacementInstance inst = generate_instance(g, cfg);
  auto ranked = rank_ta_nodes(inst, TafsVariant::Tafs1);
  const auto pos = [&](int n) {
    return std::find(ranked.begin(), ranked.end(), n) - ranked.begin();
  };
  CHECK(pos(1) < pos(2));  // equal averages, lower id first
}

TEST_CASE("pair lists are sorted by descending benefit") {
  PlacementInstance inst = square_instance(5, 2);
  for (auto variant : {TafsVariant::Tafs1, TafsVariant::Tafs2}) {
    auto lists = build_pair_lists(inst, variant);
    REQUIRE(lists.size() == static_cast<size_t>(inst.flow_count()));
    for (const auto& list : lists) {
      for (size_t i = 1; i < list.size(); ++i) CHECK(list[i - 1].benefit >= list[i].benefit);
      // Count: every on-path node plus one fictive entry per path.
      size_t expect = 0;
      for (const auto& p : inst.paths[&list - lists.data()]) expect += p.node_seq.size() + 1;
      CHECK(list.size() == expect);
    }
  }
}

TEST_CASE("parallel pair-list construction matches the serial reference") {
  PlacementInstance inst = square_instance(6, 3);
  auto a = build_pair_lists(inst, TafsVariant::Tafs1);
  auto b = build_pair_lists_serial(inst, TafsVariant::Tafs1);
  REQUIRE(a.size() == b.size());
  for (size_t f = 0; f < a.size(); ++f) {
    REQUIRE(a[f].size() == b[f].size());
    for (size_t i = 0; i < a[f].size(); ++i) {
      CHECK(a[f][i].path_index == b[f][i].path_index);
      CHECK(a[f][i].ta_node == b[f][i].ta_node);
      CHECK(a[f][i].benefit == b[f][i].benefit);
    }
  }
}

TEST_CASE("single flow with ample capacity matches the exact optimum") {
  for (std::uint64_t seed : {11ull, 12ull, 13ull, 14ull}) {
    PlacementInstance inst = square_instance(seed);
    // Keep one flow; capacities stay ample for it.
    inst.flows.resize(1);
    inst.paths.resize(1);
    inst.delta.resize(1);
    TafsSolution ts = run_tafs(inst, TafsVariant::Tafs1);
    Solution es = solve_exact(build_ilp1(inst));
    REQUIRE(es.status == SolveStatus::Optimal);
    REQUIRE(ts.assignment[0].has_value());
    CHECK(ts.objective == doctest::Approx(es.objective).epsilon(1e-12));
  }
}

TEST_CASE("a flow larger than every link is rejected") {
  PlacementInstance inst = square_instance(7);
  inst.flows[0].bandwidth_mbps = 1e6;
  TafsSolution sol = run_tafs(inst, TafsVariant::Tafs1);
  CHECK_FALSE(sol.assignment[0].has_value());
  CHECK(sol.rejected_count() == 1);
  // Every other flow still fits; the oversized one consumed nothing.
  Metrics m = evaluate(inst, sol);
  CHECK(m.violations.empty());
  CHECK(m.rejected == 1);
}

TEST_CASE("mu = 0 degenerates to greedy no-TA routing") {
  PlacementInstance inst = square_instance(8, 2);
  inst.mu = 0;
  TafsSolution sol = run_tafs(inst, TafsVariant::Tafs1);
  Solution base = no_ta_route(inst);
  for (int f = 0; f < inst.flow_count(); ++f) {
    REQUIRE(sol.assignment[f].has_value());
    CHECK(sol.assignment[f]->ta_node == inst.graph.fictive_id());
    CHECK(sol.assignment[f]->path_index == base.assignment[f]->path_index);
  }
  CHECK(sol.open_tas.empty());
}

TEST_CASE("residual conservation: usage recomputed from the assignment") {
  PlacementInstance inst = square_instance(9, 3);
  inst.mu = 2;
  TafsSolution sol = run_tafs(inst, TafsVariant::Tafs2);
  std::vector<double> link_used(inst.graph.link_count(), 0.0);
  std::vector<double> node_used(inst.graph.node_count(), 0.0);
  for (int f = 0; f < inst.flow_count(); ++f) {
    if (!sol.assignment[f]) continue;
    for (int lid : inst.paths[f][sol.assignment[f]->path_index].link_seq)
      link_used[lid] += inst.flows[f].bandwidth_mbps;
    if (sol.assignment[f]->ta_node != inst.graph.fictive_id())
      node_used[sol.assignment[f]->ta_node] += inst.flows[f].bandwidth_mbps;
  }
  for (const auto& l : inst.graph.links()) CHECK(link_used[l.id] <= l.bandwidth_mbps + 1e-9);
  for (const auto& n : inst.graph.nodes())
    CHECK(node_used[n.id] <= *n.capacity_mbps + 1e-9);
}

TEST_CASE("the TA set is confined to the top-mu ranked nodes") {
  PlacementInstance inst = square_instance(10, 3);
  inst.mu = 2;
  auto ranked = rank_ta_nodes(inst, TafsVariant::Tafs1);
  TafsSolution sol = run_tafs(inst, TafsVariant::Tafs1);
  for (int n : sol.open_tas)
    CHECK(std::find(ranked.begin(), ranked.begin() + 2, n) != ranked.begin() + 2);
  CHECK(static_cast<int>(sol.open_tas.size()) <= inst.mu);
}

TEST_CASE("TAFS is deterministic") {
  PlacementInstance inst = square_instance(11, 3);
  TafsSolution a = run_tafs(inst, TafsVariant::Tafs2);
  TafsSolution b = run_tafs(inst, TafsVariant::Tafs2);
  CHECK(a.assignment == b.assignment);
  CHECK(a.open_tas == b.open_tas);
  CHECK(a.objective == b.objective);
}

TEST_CASE("heuristic objective never beats the proven optimum") {
  for (std::uint64_t seed : {21ull, 22ull, 23ull}) {
    PlacementInstance inst = square_instance(seed, 2);
    Solution exact1 = solve_exact(build_ilp1(inst));
    TafsSolution t1 = run_tafs(inst, TafsVariant::Tafs1);
    if (exact1.status == SolveStatus::Optimal && t1.rejected_count() == 0)
      CHECK(t1.objective >= exact1.objective - 1e-9);
    Solution exact2 = solve_exact(build_ilp2(inst));
    TafsSolution t2 = run_tafs(inst, TafsVariant::Tafs2);
    if (exact2.status == SolveStatus::Optimal && t2.rejected_count() == 0)
      CHECK(t2.objective >= exact2.objective - 1e-9);
  }
}

TEST_CASE("per-flow rank mode stays a valid permutation") {
  PlacementInstance inst = square_instance(12, 2);
  auto ranked = rank_ta_nodes(inst, TafsVariant::Tafs1, RankMode::PerFlow);
  std::vector<int> sorted = ranked;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expect(inst.graph.node_count());
  for (int i = 0; i < inst.graph.node_count(); ++i) expect[i] = i;
  CHECK(sorted == expect);
}
