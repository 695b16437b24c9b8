// Shared test oracles and small-instance builders. Everything here is
// independent of the solver paths it checks: the enumerator walks the full
// option cross product and re-checks constraints from scratch at each leaf.
#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "tars/instance.hpp"
#include "tars/milp.hpp"
#include "tars/rng.hpp"

namespace tars::testsupport {

struct EnumResult {
  bool feasible = false;
  double objective = std::numeric_limits<double>::infinity();
};

inline EnumResult enumerate_best(const IlpModel& m) {
  EnumResult res;
  const int nf = static_cast<int>(m.flow_y.size());
  std::vector<int> pick(nf, 0);
  std::function<void(int)> rec = [&](int f) {
    if (f < nf) {
      for (int yi : m.flow_y[f]) {
        pick[f] = yi;
        rec(f + 1);
      }
      return;
    }
    std::vector<double> link_used(m.link_capacity.size(), 0.0);
    std::vector<double> node_used(m.node_capacity.size(), 0.0);
    std::vector<char> open(m.num_real_nodes, 0);
    double z = 0.0;
    for (int i = 0; i < nf; ++i) {
      const auto& y = m.y[static_cast<size_t>(pick[i])];
      z += y.coef;
      for (int lid : m.flow_path_links[i][y.path_index]) link_used[lid] += m.flow_bandwidth[i];
      if (y.ta_node < m.num_real_nodes) {
        node_used[y.ta_node] += m.flow_bandwidth[i];
        open[y.ta_node] = 1;
      }
    }
    for (size_t l = 0; l < link_used.size(); ++l)
      if (link_used[l] > m.link_capacity[l]) return;
    for (int n = 0; n < m.num_real_nodes; ++n)
      if (node_used[n] > m.node_capacity[n]) return;
    int open_count = 0;
    for (char o : open) open_count += o;
    if (open_count > m.mu) return;
    res.feasible = true;
    res.objective = std::min(res.objective, z);
  };
  rec(0);
  return res;
}

// Random micro-instances (4..6 nodes, 1..4 flows, <= 3 paths per flow) with
// capacities tight enough that node, link and budget constraints all bind
// somewhere in a trial set.
inline PlacementInstance micro_instance(std::uint64_t seed) {
  Rng rng(seed);
  const int n = 4 + static_cast<int>(rng.next_u64() % 3);
  NetworkGraph g;
  for (int i = 0; i < n; ++i) g.add_node({-1, "n" + std::to_string(i), {}, {}, {}});
  for (int i = 0; i < n; ++i)
    g.add_link(i, (i + 1) % n, rng.uniform(4, 14), rng.uniform(1, 10), rng.uniform(0, 0.25));
  for (int u = 0; u < n; ++u)
    for (int v = u + 2; v < n; ++v) {
      if ((u == 0 && v == n - 1) || g.find_link(u, v)) continue;
      if (rng.next_double() < 0.3)
        g.add_link(u, v, rng.uniform(4, 14), rng.uniform(1, 10), rng.uniform(0, 0.25));
    }

  GeneratorConfig cfg;
  cfg.seed = seed * 977 + 13;
  cfg.flows_per_pair = 1;
  cfg.k_paths = 3;
  cfg.bw_range = {1, 5};
  cfg.capacity_range = {4, 12};
  cfg.loss_range = {0.0, 0.25};
  PlacementInstance inst = generate_instance(g, cfg);

  const int keep = 1 + static_cast<int>(rng.next_u64() % 4);
  std::vector<Flow> flows;
  std::vector<std::vector<PathCandidate>> paths;
  std::vector<std::vector<std::vector<double>>> delta;
  for (int i = 0; i < keep; ++i) {
    int f = static_cast<int>(rng.next_u64() % inst.flows.size());
    Flow fl = inst.flows[f];
    fl.id = i;
    flows.push_back(fl);
    paths.push_back(inst.paths[f]);
    delta.push_back(inst.delta[f]);
  }
  inst.flows = flows;
  inst.paths = paths;
  inst.delta = delta;
  inst.mu = static_cast<int>(rng.next_u64() % (n + 1));
  return inst;
}

}  // namespace tars::testsupport
