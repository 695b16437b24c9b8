#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tars/instance.hpp"
#include "tars/milp.hpp"
#include "tars/solution.hpp"
#include "tars/tafs.hpp"

namespace tars {

enum class SolverSelection { Exact, Tafs, Both };

// One experiment grid: every (tm_factor, penalty, seed, mu, solver) cell is
// run and written as one CSV row.
struct ExperimentConfig {
  std::string topology_path;
  std::string topology_format = "auto";
  GeneratorConfig gen;
  std::vector<int> mu_sweep;              // exclusive with mu_percent_sweep
  std::vector<double> mu_percent_sweep;   // percent of real nodes, rounded
  std::vector<double> penalty_sweep;      // theta values, $/ms
  std::vector<double> tm_factors;         // traffic-load multipliers
  Scenario scenario = Scenario::Qos;
  SolverSelection solver = SolverSelection::Both;
  double time_limit_seconds = 60.0;
  std::string output_dir = "out";
  std::vector<std::uint64_t> seeds;       // default 1..10
  RankMode rank_mode = RankMode::PerPair;

  void check() const;  // throws std::invalid_argument
};

// Parses the `key = value` experiment config format (see README).
ExperimentConfig load_experiment_config(const std::string& path);

struct ExperimentResult {
  std::string runs_csv;
  std::string cdf_csv;
  std::string timings_csv;
  std::string report_txt;
};

// Runs the full grid and writes runs.csv, cdf.csv, timings.csv and
// report.txt under cfg.output_dir. runs.csv and cdf.csv are byte-identical
// across reruns of the same config; wall-clock times go to timings.csv.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct GapReport {
  double objective_a = 0.0;
  double objective_b = 0.0;
  double gap_pct = 0.0;        // (a - b) / |b| * 100
  int assignment_diffs = 0;    // flows assigned differently
  double runtime_ratio = 0.0;  // wall_a / wall_b
};

// Compares two solutions of the same instance; throws when the instance ids
// differ.
GapReport compare(const Solution& a, const Solution& b, const PlacementInstance& inst);

// mean and normal-approximation 95% confidence half-width.
struct MeanCi {
  double mean = 0.0;
  double ci95 = 0.0;
};
MeanCi mean_ci(const std::vector<double>& xs);

}  // namespace tars
