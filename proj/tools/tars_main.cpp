#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "tars/bench.hpp"
#include "tars/instance.hpp"
#include "tars/milp.hpp"
#include "tars/net.hpp"
#include "tars/tafs.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

struct RangeOpt {
  std::vector<double> v;
  bool set = false;
};

void add_range(CLI::App* cmd, const std::string& name, RangeOpt& r, const std::string& desc) {
  cmd->add_option_function<std::vector<double>>(
         name,
         [&r](const std::vector<double>& v) {
           r.v = v;
           r.set = true;
         },
         desc)
      ->expected(2);
}

void apply_range(const RangeOpt& r, tars::Interval& iv) {
  if (r.set) iv = {r.v[0], r.v[1]};
}

void print_metrics(const tars::Metrics& m) {
  std::cout << "avg EPDD:        " << m.avg_epdd_ms << " ms\n";
  std::cout << "improvement:     " << m.improvement_pct << " % vs no-TA baseline\n";
  std::cout << "deployment cost: " << m.deploy_cost << " $/s\n";
  std::cout << "penalty cost:    " << m.penalty_cost << " $/s\n";
  std::cout << "total cost:      " << m.total_cost << " $/s\n";
  std::cout << "rejected flows:  " << m.rejected << "\n";
  if (!m.violations.empty()) {
    std::cout << "constraint violations:\n";
    for (const auto& v : m.violations) std::cout << "  " << v << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tars: joint TCP flow routing and transport-assistant placement"};
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate a problem instance from a topology");
  std::string gen_topology, gen_format = "auto", gen_out = "instance.txt", gen_flows_csv;
  std::string gen_scenario = "qos", gen_sla_basis = "epdd";
  tars::GeneratorConfig gc;
  bool gen_no_delta = false;
  RangeOpt r_bw, r_cap, r_cost, r_loss, r_sla;
  gen->add_option("--topology", gen_topology, "topology file (plain or SNDlib)")->required();
  gen->add_option("--format", gen_format, "topology format: auto|plain|sndlib");
  gen->add_option("--seed", gc.seed, "generator seed");
  gen->add_option("--flows-per-pair", gc.flows_per_pair, "flows per ordered node pair");
  gen->add_option("--k-paths", gc.k_paths, "candidate paths per flow");
  gen->add_option("--max-hops", gc.max_hops, "hop cap for candidate paths (0 = none)");
  gen->add_option("--mu", gc.mu, "TA budget (-1 = one per node)");
  gen->add_option("--tm-factor", gc.tm_load_factor, "traffic load factor");
  gen->add_option("--penalty-rate", gc.penalty_per_ms, "penalty $/ms for SLA excess");
  gen->add_option("--scenario", gen_scenario, "best_effort|qos");
  gen->add_option("--sla-basis", gen_sla_basis, "epdd|propagation");
  add_range(gen, "--bw-range", r_bw, "flow bandwidth range (Mbps)");
  add_range(gen, "--capacity-range", r_cap, "node capacity range (Mbps)");
  add_range(gen, "--cost-range", r_cost, "node cost range ($/Mbps)");
  add_range(gen, "--loss-range", r_loss, "link loss range");
  add_range(gen, "--sla-range", r_sla, "SLA factor range");
  gen->add_option("-o,--output", gen_out, "instance file to write");
  gen->add_option("--flows-csv", gen_flows_csv, "also export the flow table as CSV");
  gen->add_flag("--no-delta", gen_no_delta, "omit the delta table from the file");

  // ---- solve ----
  auto* solve = app.add_subcommand("solve", "solve an instance exactly (branch and bound)");
  std::string solve_instance, solve_out, solve_metrics, solve_scenario, solve_lp;
  double solve_limit = 60.0;
  int solve_mu = -2;
  solve->add_option("--instance", solve_instance, "instance file")->required();
  solve->add_option("--scenario", solve_scenario, "best_effort|qos (default: from instance)");
  solve->add_option("--mu", solve_mu, "override the instance TA budget");
  solve->add_option("--time-limit", solve_limit, "wall-clock limit in seconds");
  solve->add_option("-o,--output", solve_out, "solution file to write");
  solve->add_option("--metrics-csv", solve_metrics, "metrics CSV to write");

  // ---- tafs ----
  auto* tafs = app.add_subcommand("tafs", "solve an instance with the TAFS heuristic");
  std::string tafs_instance, tafs_out, tafs_metrics, tafs_scenario, tafs_rank = "per_pair";
  int tafs_mu = -2;
  tafs->add_option("--instance", tafs_instance, "instance file")->required();
  tafs->add_option("--scenario", tafs_scenario,
                   "best_effort|qos, selects TAFS1/TAFS2 (default: from instance)");
  tafs->add_option("--mu", tafs_mu, "override the instance TA budget");
  tafs->add_option("--rank-mode", tafs_rank, "per_pair|per_flow node ranking");
  tafs->add_option("-o,--output", tafs_out, "solution file to write");
  tafs->add_option("--metrics-csv", tafs_metrics, "metrics CSV to write");

  // ---- bench ----
  auto* bench = app.add_subcommand("bench", "run an experiment grid from a config file");
  std::string bench_config, bench_out;
  bench->add_option("--config", bench_config, "experiment config file")->required();
  bench->add_option("-o,--output-dir", bench_out,
                    "output directory (default: config value or $TARS_OUT_DIR)");

  // ---- export-lp ----
  auto* exp = app.add_subcommand("export-lp", "write the ILP in LP text format");
  std::string exp_instance, exp_out = "model.lp", exp_scenario;
  int exp_mu = -2;
  exp->add_option("--instance", exp_instance, "instance file")->required();
  exp->add_option("--scenario", exp_scenario, "best_effort|qos (default: from instance)");
  exp->add_option("--mu", exp_mu, "override the instance TA budget");
  exp->add_option("-o,--output", exp_out, "LP file to write");

  // ---- validate ----
  auto* val = app.add_subcommand("validate", "check a topology file");
  std::string val_topology, val_format = "auto";
  val->add_option("--topology", val_topology, "topology file")->required();
  val->add_option("--format", val_format, "topology format: auto|plain|sndlib");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*gen) {
      gc.scenario = tars::scenario_from_string(gen_scenario);
      gc.sla_basis = gen_sla_basis == "propagation" ? tars::SlaBasis::Propagation
                                                    : tars::SlaBasis::Epdd;
      apply_range(r_bw, gc.bw_range);
      apply_range(r_cap, gc.capacity_range);
      apply_range(r_cost, gc.cost_range);
      apply_range(r_loss, gc.loss_range);
      apply_range(r_sla, gc.sla_factor_range);
      tars::NetworkGraph g = tars::load_topology_file(gen_topology, gen_format);
      tars::PlacementInstance inst = tars::generate_instance(g, gc);
      tars::save_instance(inst, gen_out, !gen_no_delta);
      if (!gen_flows_csv.empty()) tars::write_flow_csv(inst, gen_flows_csv);
      std::cout << "wrote " << gen_out << ": " << inst.flows.size() << " flows, "
                << g.node_count() << " nodes, mu=" << inst.mu << "\n";
    } else if (*solve) {
      tars::PlacementInstance inst = tars::load_instance(solve_instance);
      if (!solve_scenario.empty()) inst.scenario = tars::scenario_from_string(solve_scenario);
      if (solve_mu >= 0) inst.mu = solve_mu;
      tars::IlpModel model = inst.scenario == tars::Scenario::BestEffort
                                 ? tars::build_ilp1(inst)
                                 : tars::build_ilp2(inst);
      tars::Solution sol = tars::solve_exact(model, solve_limit);
      std::cout << "status: " << tars::to_string(sol.status)
                << ", objective: " << sol.objective << ", wall: " << sol.wall_seconds
                << " s\n";
      if (sol.status == tars::SolveStatus::Infeasible) return kExitInfeasible;
      tars::Metrics m = tars::evaluate(inst, sol);
      print_metrics(m);
      if (!solve_out.empty()) tars::save_solution(sol, inst, solve_out);
      if (!solve_metrics.empty()) tars::write_metrics_csv(m, solve_metrics);
    } else if (*tafs) {
      tars::PlacementInstance inst = tars::load_instance(tafs_instance);
      if (!tafs_scenario.empty()) inst.scenario = tars::scenario_from_string(tafs_scenario);
      if (tafs_mu >= 0) inst.mu = tafs_mu;
      const tars::TafsVariant variant = inst.scenario == tars::Scenario::BestEffort
                                            ? tars::TafsVariant::Tafs1
                                            : tars::TafsVariant::Tafs2;
      const tars::RankMode mode =
          tafs_rank == "per_flow" ? tars::RankMode::PerFlow : tars::RankMode::PerPair;
      tars::Solution sol = tars::run_tafs(inst, variant, mode);
      std::cout << "variant: " << (variant == tars::TafsVariant::Tafs1 ? "TAFS1" : "TAFS2")
                << ", objective: " << sol.objective << ", wall: " << sol.wall_seconds
                << " s\n";
      tars::Metrics m = tars::evaluate(inst, sol);
      print_metrics(m);
      if (!tafs_out.empty()) tars::save_solution(sol, inst, tafs_out);
      if (!tafs_metrics.empty()) tars::write_metrics_csv(m, tafs_metrics);
    } else if (*bench) {
      tars::ExperimentConfig cfg = tars::load_experiment_config(bench_config);
      if (!bench_out.empty()) {
        cfg.output_dir = bench_out;
      } else if (const char* env = std::getenv("TARS_OUT_DIR"); env && *env) {
        cfg.output_dir = env;
      }
      tars::ExperimentResult res = tars::run_experiment(cfg);
      std::cout << "wrote " << res.runs_csv << ", " << res.cdf_csv << ", " << res.timings_csv
                << ", " << res.report_txt << "\n";
    } else if (*exp) {
      tars::PlacementInstance inst = tars::load_instance(exp_instance);
      if (!exp_scenario.empty()) inst.scenario = tars::scenario_from_string(exp_scenario);
      if (exp_mu >= 0) inst.mu = exp_mu;
      tars::IlpModel model = inst.scenario == tars::Scenario::BestEffort
                                 ? tars::build_ilp1(inst)
                                 : tars::build_ilp2(inst);
      tars::export_lp(model, exp_out);
      std::cout << "wrote " << exp_out << ": " << model.column_count() << " binaries, "
                << model.rows.size() << " rows\n";
    } else if (*val) {
      tars::NetworkGraph g = tars::load_topology_file(val_topology, val_format);
      auto violations = tars::validate(g);
      if (violations.empty()) {
        std::cout << "ok: " << g.node_count() << " nodes, " << g.link_count() << " links\n";
      } else {
        for (const auto& v : violations) std::cout << "violation: " << v << "\n";
        return kExitError;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitOk;
}
