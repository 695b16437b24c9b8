#pragma once

#include <vector>

#include "tars/instance.hpp"
#include "tars/solution.hpp"

namespace tars {

enum class TafsVariant { Tafs1, Tafs2 };

// How node rankings average benefits: over all (flow, path) pairs through
// the node (default), or first per flow and then across flows.
enum class RankMode { PerPair, PerFlow };

// Delay reduction of placing the TA at `ta` instead of nowhere, on the same
// path: delta(f,p,n*) - delta(f,p,ta). Zero for the fictive node itself.
double benefit1(const PlacementInstance& inst, int flow, int path_index, int ta);

// Penalty reduction, clamped at zero:
// max(0, theta * max(0, delta(n*) - sla) - theta * max(0, delta(ta) - sla)).
double benefit2(const PlacementInstance& inst, int flow, int path_index, int ta);

struct PairChoice {
  int path_index = -1;
  int ta_node = -1;  // fictive id for the no-TA option
  double benefit = 0.0;      // improvement over the flow's best no-TA route
  double delta_ms = 0.0;
  double deploy_cost = 0.0;  // alpha_n * b_f, zero for the fictive node
};

// Pair_f lists: every (path, on-path node) plus (path, n*) per path, sorted
// by descending benefit, where the benefit is measured against the flow's
// best no-TA route (so candidates on different paths compare on a common
// reference). Ties prefer the cost-free option, then lower delay, then lower
// node id, then lexicographically smaller path; TAFS2 orders equal-benefit
// entries by ascending deployment cost first.
std::vector<std::vector<PairChoice>> build_pair_lists(const PlacementInstance& inst,
                                                      TafsVariant variant);
std::vector<std::vector<PairChoice>> build_pair_lists_serial(const PlacementInstance& inst,
                                                             TafsVariant variant);

// Real nodes ordered by descending average benefit (ties: lower id). Nodes
// on no candidate path average zero.
std::vector<int> rank_ta_nodes(const PlacementInstance& inst, TafsVariant variant,
                               RankMode mode = RankMode::PerPair);

// The TAFS heuristic: opens the top-mu ranked nodes, then assigns flows in
// descending bandwidth order to the first feasible pair in their sorted
// lists; flows with no feasible pair are rejected.
TafsSolution run_tafs(const PlacementInstance& inst, TafsVariant variant,
                      RankMode mode = RankMode::PerPair);

}  // namespace tars
