#include "tars/tafs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace tars {

double benefit1(const PlacementInstance& inst, int flow, int path_index, int ta) {
  return inst.delta_of(flow, path_index, inst.graph.fictive_id()) -
         inst.delta_of(flow, path_index, ta);
}

double benefit2(const PlacementInstance& inst, int flow, int path_index, int ta) {
  const Flow& f = inst.flows[flow];
  const double no_ta = inst.delta_of(flow, path_index, inst.graph.fictive_id());
  const double with_ta = inst.delta_of(flow, path_index, ta);
  const double penalty_no_ta = f.penalty_per_ms * std::max(0.0, no_ta - f.sla_ms);
  const double penalty_with_ta = f.penalty_per_ms * std::max(0.0, with_ta - f.sla_ms);
  return std::max(0.0, penalty_no_ta - penalty_with_ta);
}

namespace {

std::vector<PairChoice> pair_list_for_flow(const PlacementInstance& inst, int f,
                                           TafsVariant variant) {
  const int fictive = inst.graph.fictive_id();
  // The list is ranked by improvement over the flow's best no-TA route, a
  // per-flow constant. Measuring against each pair's own path would reward
  // long lossy paths for their retransmission headroom and pull flows onto
  // strictly worse routes. TAFS2 further nets out the deployment cost: a
  // penalty reduction smaller than the TA it buys must not outrank the free
  // option.
  double best_no_ta = std::numeric_limits<double>::infinity();
  for (size_t p = 0; p < inst.paths[f].size(); ++p)
    best_no_ta = std::min(best_no_ta, inst.delta[f][p].back());
  const Flow& flow = inst.flows[f];
  const double ref_penalty = flow.penalty_per_ms * std::max(0.0, best_no_ta - flow.sla_ms);

  std::vector<PairChoice> pairs;
  for (size_t p = 0; p < inst.paths[f].size(); ++p) {
    auto add = [&](int node) {
      PairChoice c;
      c.path_index = static_cast<int>(p);
      c.ta_node = node;
      c.delta_ms = inst.delta_of(f, static_cast<int>(p), node);
      c.deploy_cost = node == fictive
                          ? 0.0
                          : *inst.graph.node(node).unit_cost * inst.flows[f].bandwidth_mbps;
      const double pair_penalty =
          flow.penalty_per_ms * std::max(0.0, c.delta_ms - flow.sla_ms);
      c.benefit = variant == TafsVariant::Tafs1
                      ? best_no_ta - c.delta_ms
                      : ref_penalty - (pair_penalty + c.deploy_cost);
      pairs.push_back(c);
    };
    for (int node : inst.paths[f][p].node_seq) add(node);
    add(fictive);
  }
  // Descending benefit. Equal benefits prefer the cost-free choice (TAFS2
  // orders by deployment cost, which puts the fictive node first as well),
  // then lower delay, then lower node id, then the smaller path.
  std::sort(pairs.begin(), pairs.end(), [&](const PairChoice& a, const PairChoice& b) {
    if (a.benefit != b.benefit) return a.benefit > b.benefit;
    if (variant == TafsVariant::Tafs2) {
      if (a.deploy_cost != b.deploy_cost) return a.deploy_cost < b.deploy_cost;
    } else {
      const bool a_free = a.ta_node == fictive, b_free = b.ta_node == fictive;
      if (a_free != b_free) return a_free;
    }
    if (a.delta_ms != b.delta_ms) return a.delta_ms < b.delta_ms;
    if (a.ta_node != b.ta_node) return a.ta_node < b.ta_node;
    return inst.paths[f][a.path_index].node_seq < inst.paths[f][b.path_index].node_seq;
  });
  return pairs;
}

}  // namespace

std::vector<std::vector<PairChoice>> build_pair_lists_serial(const PlacementInstance& inst,
                                                             TafsVariant variant) {
  std::vector<std::vector<PairChoice>> lists(inst.flows.size());
  for (size_t f = 0; f < inst.flows.size(); ++f)
    lists[f] = pair_list_for_flow(inst, static_cast<int>(f), variant);
  return lists;
}

std::vector<std::vector<PairChoice>> build_pair_lists(const PlacementInstance& inst,
                                                      TafsVariant variant) {
  std::vector<std::vector<PairChoice>> lists(inst.flows.size());
  const long n = static_cast<long>(inst.flows.size());
#pragma omp parallel for schedule(static)
  for (long f = 0; f < n; ++f)
    lists[static_cast<size_t>(f)] = pair_list_for_flow(inst, static_cast<int>(f), variant);
  return lists;
}

std::vector<int> rank_ta_nodes(const PlacementInstance& inst, TafsVariant variant,
                               RankMode mode) {
  const int n_nodes = inst.graph.node_count();
  std::vector<double> avg(n_nodes, 0.0);

  if (mode == RankMode::PerPair) {
    std::vector<double> sum(n_nodes, 0.0);
    std::vector<long> count(n_nodes, 0);
    for (int f = 0; f < inst.flow_count(); ++f)
      for (size_t p = 0; p < inst.paths[f].size(); ++p)
        for (int node : inst.paths[f][p].node_seq) {
          sum[node] += variant == TafsVariant::Tafs1
                           ? benefit1(inst, f, static_cast<int>(p), node)
                           : benefit2(inst, f, static_cast<int>(p), node);
          ++count[node];
        }
    for (int n = 0; n < n_nodes; ++n) avg[n] = count[n] > 0 ? sum[n] / count[n] : 0.0;
  } else {
    // Average per flow first, then across the flows that can use the node.
    std::vector<double> sum(n_nodes, 0.0);
    std::vector<long> flows_with(n_nodes, 0);
    for (int f = 0; f < inst.flow_count(); ++f) {
      std::vector<double> fsum(n_nodes, 0.0);
      std::vector<long> fcount(n_nodes, 0);
      for (size_t p = 0; p < inst.paths[f].size(); ++p)
        for (int node : inst.paths[f][p].node_seq) {
          fsum[node] += variant == TafsVariant::Tafs1
                            ? benefit1(inst, f, static_cast<int>(p), node)
                            : benefit2(inst, f, static_cast<int>(p), node);
          ++fcount[node];
        }
      for (int n = 0; n < n_nodes; ++n)
        if (fcount[n] > 0) {
          sum[n] += fsum[n] / fcount[n];
          ++flows_with[n];
        }
    }
    for (int n = 0; n < n_nodes; ++n) avg[n] = flows_with[n] > 0 ? sum[n] / flows_with[n] : 0.0;
  }

  std::vector<int> ranked(n_nodes);
  std::iota(ranked.begin(), ranked.end(), 0);
  std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
    if (avg[a] != avg[b]) return avg[a] > avg[b];
    return a < b;
  });
  return ranked;
}

TafsSolution run_tafs(const PlacementInstance& inst, TafsVariant variant, RankMode mode) {
  const auto t0 = std::chrono::steady_clock::now();
  const int nf = inst.flow_count();
  const int fictive = inst.graph.fictive_id();

  auto pair_lists = build_pair_lists(inst, variant);
  auto ranked = rank_ta_nodes(inst, variant, mode);

  std::vector<char> is_ta(inst.graph.node_count(), 0);
  const int n_tas = std::min<int>(inst.mu, static_cast<int>(ranked.size()));
  for (int i = 0; i < n_tas; ++i) is_ta[ranked[i]] = 1;

  std::vector<double> link_rem;
  for (const auto& l : inst.graph.links()) link_rem.push_back(l.bandwidth_mbps);
  std::vector<double> node_rem;
  for (const auto& n : inst.graph.nodes()) node_rem.push_back(n.capacity_mbps.value_or(0.0));

  std::vector<int> order(nf);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (inst.flows[a].bandwidth_mbps != inst.flows[b].bandwidth_mbps)
      return inst.flows[a].bandwidth_mbps > inst.flows[b].bandwidth_mbps;
    return a < b;
  });

  TafsSolution sol;
  sol.status = SolveStatus::Feasible;
  sol.assignment.assign(nf, std::nullopt);
  sol.instance_id = inst.instance_id;

  for (int f : order) {
    const double b = inst.flows[f].bandwidth_mbps;
    for (const PairChoice& c : pair_lists[f]) {
      const bool real = c.ta_node != fictive;
      if (real && !is_ta[c.ta_node]) continue;
      bool links_ok = true;
      for (int lid : inst.paths[f][c.path_index].link_seq)
        if (link_rem[lid] < b) {
          links_ok = false;
          break;
        }
      if (!links_ok) continue;
      // Node capacity only matters when a TA actually serves the flow.
      if (real) {
        if (node_rem[c.ta_node] < b) continue;
        node_rem[c.ta_node] -= b;
      }
      for (int lid : inst.paths[f][c.path_index].link_seq) link_rem[lid] -= b;
      sol.assignment[f] = FlowAssignment{c.path_index, c.ta_node};
      break;
    }
  }

  // Objective mirrors the matching ILP so gaps are directly comparable.
  double obj = 0.0;
  std::vector<char> used(inst.graph.node_count(), 0);
  for (int f = 0; f < nf; ++f) {
    if (!sol.assignment[f]) continue;
    const auto& a = *sol.assignment[f];
    const double d = inst.delta_of(f, a.path_index, a.ta_node);
    if (variant == TafsVariant::Tafs1) {
      obj += d / nf;
    } else {
      const double alpha = a.ta_node == fictive ? 0.0 : *inst.graph.node(a.ta_node).unit_cost;
      obj += alpha * inst.flows[f].bandwidth_mbps +
             inst.flows[f].penalty_per_ms * std::max(0.0, d - inst.flows[f].sla_ms);
    }
    if (a.ta_node != fictive) used[a.ta_node] = 1;
  }
  for (int n = 0; n < inst.graph.node_count(); ++n)
    if (used[n]) sol.open_tas.push_back(n);
  sol.objective = obj;
  sol.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

}  // namespace tars
