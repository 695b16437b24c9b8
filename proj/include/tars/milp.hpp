#pragma once

#include <string>
#include <vector>

#include "tars/instance.hpp"
#include "tars/solution.hpp"

namespace tars {

// Binary program over x_n (open a TA at real node n) and y_{f,p}^n (flow f
// routed on path p with its TA at n, or at the fictive node for no TA).
// Columns 0..N-1 are the x variables; y columns follow in (flow, path,
// position) order with the fictive option last per path.
struct IlpModel {
  struct YVar {
    int flow = -1;
    int path_index = -1;
    int ta_node = -1;  // fictive id allowed
    double coef = 0.0; // objective coefficient
  };

  struct Row {
    std::string name;
    std::vector<std::pair<int, double>> terms;  // (column, coefficient)
    char sense = 'L';                           // 'L' (<=) or 'E' (=)
    double rhs = 0.0;
  };

  int objective_kind = 1;  // 1 = average EPDD, 2 = deployment + penalty cost
  int num_real_nodes = 0;
  int num_links = 0;
  int mu = 0;
  std::uint64_t instance_id = 0;

  std::vector<double> node_capacity;   // per real node
  std::vector<double> link_capacity;   // per link
  std::vector<double> flow_bandwidth;  // b_f
  // flow_path_links[f][p] = link ids of candidate path p of flow f.
  std::vector<std::vector<std::vector<int>>> flow_path_links;

  std::vector<YVar> y;                  // grouped by flow
  std::vector<std::vector<int>> flow_y; // per flow, indices into y
  std::vector<Row> rows;                // full constraint system

  int x_column(int node) const { return node; }
  int y_column(int y_index) const { return num_real_nodes + y_index; }
  int column_count() const { return num_real_nodes + static_cast<int>(y.size()); }
  std::string column_name(int col) const;
};

// Objective 1: minimize the average EPDD over all flows; coefficient of
// y_{f,p}^n is delta(f,p,n) / |F|.
IlpModel build_ilp1(const PlacementInstance& inst);

// Objective 2: minimize deployment cost plus SLA penalty; coefficient of
// y_{f,p}^n is alpha_n b_f + theta_f max(delta(f,p,n) - sla_f, 0), a data
// constant since delta is precomputed. The fictive node costs nothing.
IlpModel build_ilp2(const PlacementInstance& inst);

// Exact depth-first branch and bound over the per-flow options: flows in
// descending bandwidth order, options in ascending coefficient order.
// Returns the proven optimum, or the best incumbent with TimedOut when the
// wall-clock limit expires, or Infeasible.
Solution solve_exact(const IlpModel& m, double time_limit_seconds = 60.0);

// Writes the model in LP text format (Minimize / Subject To / Binary / End),
// byte-identical across runs.
void export_lp(const IlpModel& m, const std::string& path);
std::string export_lp_string(const IlpModel& m);

// Recomputes every metric of a solution against the instance, including the
// improvement over the no-TA baseline and any constraint violations.
Metrics evaluate(const PlacementInstance& inst, const Solution& sol);

struct EvaluateOptions {
  // When > 0, each rejected flow adds theta_f * cap to the penalty total.
  double rejection_penalty_cap_ms = 0.0;
};

Metrics evaluate(const PlacementInstance& inst, const Solution& sol,
                 const EvaluateOptions& opts);

void save_solution(const Solution& sol, const PlacementInstance& inst, const std::string& path);
void write_metrics_csv(const Metrics& m, const std::string& path);

}  // namespace tars
