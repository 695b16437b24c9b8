#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tars/epdd.hpp"
#include "tars/net.hpp"
#include "tars/paths.hpp"
#include "tars/solution.hpp"

namespace tars {

enum class Scenario { BestEffort, Qos };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct Flow {
  int id = -1;
  int src = -1;
  int dst = -1;
  double bandwidth_mbps = 0.0;  // b_f
  double sla_ms = 0.0;          // d-bar_f, upper limit on EPDD
  double penalty_per_ms = 0.0;  // theta_f, $/ms of SLA excess

  bool operator==(const Flow&) const = default;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  bool operator==(const Interval&) const = default;
};

enum class SlaBasis { Epdd, Propagation };

struct GeneratorConfig {
  std::uint64_t seed = 1;
  int flows_per_pair = 5;
  Interval bw_range{0.25, 1.25};         // flow bandwidth b_f, Mbps
  Interval capacity_range{200.0, 350.0}; // node processing capacity, Mbps
  Interval cost_range{7e-5, 11e-5};      // node unit cost, $/Mbps
  Interval loss_range{0.01, 0.05};       // per-link loss probability
  Interval sla_factor_range{0.9, 1.1};   // SLA as a factor of the shortest-path delay
  double penalty_per_ms = 5e-5;          // theta_f, identical for all flows
  int k_paths = 5;                       // candidate paths per flow
  double tm_load_factor = 1.0;           // scales bw_range to emulate traffic matrices
  SlaBasis sla_basis = SlaBasis::Epdd;   // shortest-path delay measured with or without retransmissions
  int max_hops = 0;                      // optional hop cap for candidate paths (0 = none)
  int mu = -1;                           // TA budget; -1 means one per real node
  Scenario scenario = Scenario::Qos;
  DelayModelConfig delay_model;

  void check() const;  // throws std::invalid_argument on bad values
};

// A complete problem instance: network with all attributes filled, flows,
// candidate paths, and the precomputed delta table.
struct PlacementInstance {
  NetworkGraph graph;
  std::vector<Flow> flows;
  // paths[f] = candidate list P_f, ordered by (delay, node_seq).
  std::vector<std::vector<PathCandidate>> paths;
  // delta[f][p][k]: EPDD with the TA at node_seq[k]; the trailing entry is
  // the fictive node (no TA).
  std::vector<std::vector<std::vector<double>>> delta;
  int mu = 0;
  Scenario scenario = Scenario::Qos;
  DelayModelConfig delay_model;
  std::uint64_t instance_id = 0;

  int flow_count() const { return static_cast<int>(flows.size()); }
  // EPDD for (flow, path index, ta node id); accepts the fictive id.
  double delta_of(int flow, int path_index, int ta_node) const;

  bool operator==(const PlacementInstance&) const;
};

// Deterministic given (g, cfg.seed): fills unset node capacities/costs and
// link losses from the configured ranges, creates flows_per_pair flows per
// ordered node pair, enumerates candidate paths, and computes the delta
// table. Throws on invalid input (including a disconnected graph).
PlacementInstance generate_instance(const NetworkGraph& g, const GeneratorConfig& cfg);

// Recomputes inst.delta from inst.paths. The parallel kernel and the serial
// reference produce bit-identical tables.
void compute_delta_table(PlacementInstance& inst);
void compute_delta_table_serial(PlacementInstance& inst);

void save_instance(const PlacementInstance& inst, const std::string& path,
                   bool include_delta = true);
PlacementInstance load_instance(const std::string& path);

void write_flow_csv(const PlacementInstance& inst, const std::string& path);

// Greedy capacity-feasible routing on delta(f, p, n*) only: flows in
// descending bandwidth order, each taking its lowest-delay feasible path.
// The comparison point for all improvement percentages.
Solution no_ta_route(const PlacementInstance& inst);

// avg EPDD / penalty / rejection metrics of no_ta_route.
Metrics no_ta_baseline(const PlacementInstance& inst);

}  // namespace tars
