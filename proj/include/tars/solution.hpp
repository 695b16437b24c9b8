#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace tars {

enum class SolveStatus { Optimal, Feasible, Infeasible, TimedOut };

std::string to_string(SolveStatus s);

struct FlowAssignment {
  int path_index = -1;  // index into the flow's candidate path list
  int ta_node = -1;     // node id; the fictive id means no TA

  bool operator==(const FlowAssignment&) const = default;
};

// Joint routing + TA placement result. Produced by the exact solver and by
// TAFS; rejected flows (TAFS only) have no assignment.
struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<std::optional<FlowAssignment>> assignment;  // one entry per flow
  std::vector<int> open_tas;  // real nodes serving at least one flow, sorted
  double objective = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;
  std::uint64_t instance_id = 0;

  int rejected_count() const {
    int r = 0;
    for (const auto& a : assignment)
      if (!a) ++r;
    return r;
  }
};

using TafsSolution = Solution;

// Everything evaluate() reports about a solution.
struct Metrics {
  double avg_epdd_ms = 0.0;       // over assigned flows
  double improvement_pct = 0.0;   // vs the no-TA baseline average
  double deploy_cost = 0.0;       // $/s, sum of alpha_n * b_f
  double penalty_cost = 0.0;      // $/s, sum of theta_f * max(delta - sla, 0)
  double total_cost = 0.0;        // deploy + penalty
  int rejected = 0;
  // Per-flow breakdown; NaN / 0 entries for rejected flows.
  std::vector<double> flow_epdd_ms;
  std::vector<double> flow_deploy_cost;
  std::vector<double> flow_penalty_cost;
  std::vector<double> per_flow_improvement_pct;  // CDF samples, assigned-in-both flows
  std::vector<std::string> violations;           // empty for accepted solutions
};

}  // namespace tars
