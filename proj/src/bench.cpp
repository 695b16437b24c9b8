#include "tars/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "tars/tafs.hpp"

namespace tars {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Values are aggregated exactly as written, so every report number can be
// recomputed from the CSV alone.
double csv_round(double v) { return std::stod(fmt_double(v)); }

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

}  // namespace

MeanCi mean_ci(const std::vector<double>& xs) {
  MeanCi r;
  if (xs.empty()) return r;
  double sum = 0.0;
  for (double x : xs) sum += x;
  r.mean = sum / xs.size();
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    const double sd = std::sqrt(ss / (xs.size() - 1));
    r.ci95 = 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return r;
}

void ExperimentConfig::check() const {
  if (topology_path.empty()) throw std::invalid_argument("config: topology is required");
  if (!mu_sweep.empty() && !mu_percent_sweep.empty())
    throw std::invalid_argument("config: set mu_sweep or mu_percent_sweep, not both");
  for (int mu : mu_sweep)
    if (mu < 0) throw std::invalid_argument("config: mu values must be >= 0");
  for (double p : mu_percent_sweep)
    if (p < 0 || p > 100) throw std::invalid_argument("config: mu percents must be in [0,100]");
  for (double p : penalty_sweep)
    if (p < 0) throw std::invalid_argument("config: penalty values must be >= 0");
  for (double t : tm_factors)
    if (t <= 0) throw std::invalid_argument("config: tm factors must be > 0");
  if (penalty_sweep.empty()) throw std::invalid_argument("config: penalty sweep is empty");
  if (tm_factors.empty()) throw std::invalid_argument("config: tm factor list is empty");
  if (seeds.empty()) throw std::invalid_argument("config: seed list is empty");
  {
    auto s = seeds;
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end())
      throw std::invalid_argument("config: seeds must be distinct");
  }
  if (time_limit_seconds <= 0) throw std::invalid_argument("config: time limit must be > 0");
  gen.check();
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (!split_ws(line).empty())
        throw ParseError("expected 'key = value'", line_no);
      continue;
    }
    auto keys = split_ws(line.substr(0, eq));
    auto vals = split_ws(line.substr(eq + 1));
    if (keys.size() != 1) throw ParseError("expected a single key before '='", line_no);
    const std::string& key = keys[0];
    auto need = [&](size_t n) {
      if (vals.size() != n)
        throw ParseError("key '" + key + "' expects " + std::to_string(n) + " value(s)",
                         line_no);
    };
    auto need_some = [&]() {
      if (vals.empty()) throw ParseError("key '" + key + "' expects at least one value", line_no);
    };
    try {
      if (key == "topology") need(1), cfg.topology_path = vals[0];
      else if (key == "format") need(1), cfg.topology_format = vals[0];
      else if (key == "output_dir") need(1), cfg.output_dir = vals[0];
      else if (key == "scenario") need(1), cfg.scenario = scenario_from_string(vals[0]);
      else if (key == "solver") {
        need(1);
        if (vals[0] == "exact") cfg.solver = SolverSelection::Exact;
        else if (vals[0] == "tafs") cfg.solver = SolverSelection::Tafs;
        else if (vals[0] == "both") cfg.solver = SolverSelection::Both;
        else throw ParseError("solver must be exact, tafs or both", line_no);
      } else if (key == "time_limit_s") need(1), cfg.time_limit_seconds = std::stod(vals[0]);
      else if (key == "seeds") {
        need_some();
        cfg.seeds.clear();
        for (const auto& v : vals) cfg.seeds.push_back(std::stoull(v));
      } else if (key == "mu_sweep") {
        need_some();
        for (const auto& v : vals) cfg.mu_sweep.push_back(std::stoi(v));
      } else if (key == "mu_percent_sweep") {
        need_some();
        for (const auto& v : vals) cfg.mu_percent_sweep.push_back(std::stod(v));
      } else if (key == "penalty_sweep") {
        need_some();
        for (const auto& v : vals) cfg.penalty_sweep.push_back(std::stod(v));
      } else if (key == "tm_factors") {
        need_some();
        for (const auto& v : vals) cfg.tm_factors.push_back(std::stod(v));
      } else if (key == "rank_mode") {
        need(1);
        if (vals[0] == "per_pair") cfg.rank_mode = RankMode::PerPair;
        else if (vals[0] == "per_flow") cfg.rank_mode = RankMode::PerFlow;
        else throw ParseError("rank_mode must be per_pair or per_flow", line_no);
      } else if (key == "flows_per_pair") need(1), cfg.gen.flows_per_pair = std::stoi(vals[0]);
      else if (key == "k_paths") need(1), cfg.gen.k_paths = std::stoi(vals[0]);
      else if (key == "max_hops") need(1), cfg.gen.max_hops = std::stoi(vals[0]);
      else if (key == "bw_range") need(2), cfg.gen.bw_range = {std::stod(vals[0]), std::stod(vals[1])};
      else if (key == "capacity_range")
        need(2), cfg.gen.capacity_range = {std::stod(vals[0]), std::stod(vals[1])};
      else if (key == "cost_range")
        need(2), cfg.gen.cost_range = {std::stod(vals[0]), std::stod(vals[1])};
      else if (key == "loss_range")
        need(2), cfg.gen.loss_range = {std::stod(vals[0]), std::stod(vals[1])};
      else if (key == "sla_factor_range")
        need(2), cfg.gen.sla_factor_range = {std::stod(vals[0]), std::stod(vals[1])};
      else if (key == "penalty_rate") need(1), cfg.gen.penalty_per_ms = std::stod(vals[0]);
      else if (key == "sla_basis") {
        need(1);
        if (vals[0] == "epdd") cfg.gen.sla_basis = SlaBasis::Epdd;
        else if (vals[0] == "propagation") cfg.gen.sla_basis = SlaBasis::Propagation;
        else throw ParseError("sla_basis must be epdd or propagation", line_no);
      } else if (key == "rto_multiplier")
        need(1), cfg.gen.delay_model.rto_multiplier = std::stod(vals[0]);
      else if (key == "tail_epsilon") need(1), cfg.gen.delay_model.tail_epsilon = std::stod(vals[0]);
      else if (key == "max_retx") need(1), cfg.gen.delay_model.max_retx = std::stoi(vals[0]);
      else throw ParseError("unknown config key '" + key + "'", line_no);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError("bad value for '" + key + "': " + e.what(), line_no);
    }
  }
  if (cfg.seeds.empty())
    for (std::uint64_t s = 1; s <= 10; ++s) cfg.seeds.push_back(s);
  if (cfg.tm_factors.empty()) cfg.tm_factors.push_back(1.0);
  if (cfg.penalty_sweep.empty()) cfg.penalty_sweep.push_back(cfg.gen.penalty_per_ms);
  return cfg;
}

GapReport compare(const Solution& a, const Solution& b, const PlacementInstance& inst) {
  if (a.instance_id != inst.instance_id || b.instance_id != inst.instance_id)
    throw std::invalid_argument("compare: solutions belong to different instances");
  GapReport r;
  r.objective_a = a.objective;
  r.objective_b = b.objective;
  r.gap_pct = b.objective != 0.0 ? (a.objective - b.objective) / std::abs(b.objective) * 100.0
                                 : (a.objective == 0.0 ? 0.0 : 100.0);
  const size_t n = std::min(a.assignment.size(), b.assignment.size());
  for (size_t f = 0; f < n; ++f)
    if (a.assignment[f] != b.assignment[f]) ++r.assignment_diffs;
  r.runtime_ratio = a.wall_seconds / std::max(b.wall_seconds, 1e-12);
  return r;
}

namespace {

struct CellKey {
  double tm, penalty;
  int mu;
  std::string solver;
  bool operator<(const CellKey& o) const {
    if (tm != o.tm) return tm < o.tm;
    if (penalty != o.penalty) return penalty < o.penalty;
    if (mu != o.mu) return mu < o.mu;
    return solver < o.solver;
  }
};

struct CellAgg {
  std::vector<double> improvement, avg_epdd, total_cost, savings, gap, wall;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.check();
  NetworkGraph g = load_topology_file(cfg.topology_path, cfg.topology_format);
  {
    auto violations = validate(g);
    if (!violations.empty()) {
      std::string msg = "invalid topology:";
      for (const auto& v : violations) msg += "\n  " + v;
      throw std::runtime_error(msg);
    }
  }

  std::vector<int> mu_list = cfg.mu_sweep;
  if (mu_list.empty()) {
    for (double pct : cfg.mu_percent_sweep)
      mu_list.push_back(static_cast<int>(std::lround(pct / 100.0 * g.node_count())));
    if (mu_list.empty()) mu_list.push_back(g.node_count());
  }

  std::filesystem::create_directories(cfg.output_dir);
  ExperimentResult res;
  res.runs_csv = cfg.output_dir + "/runs.csv";
  res.cdf_csv = cfg.output_dir + "/cdf.csv";
  res.timings_csv = cfg.output_dir + "/timings.csv";
  res.report_txt = cfg.output_dir + "/report.txt";

  std::ofstream runs(res.runs_csv);
  std::ofstream cdf(res.cdf_csv);
  std::ofstream timings(res.timings_csv);
  if (!runs || !cdf || !timings)
    throw std::runtime_error("cannot write output files under " + cfg.output_dir);
  runs << "seed,tm_factor,penalty_per_ms,mu,solver,status,objective,avg_epdd_ms,"
          "improvement_pct,deploy_cost_per_s,penalty_cost_per_s,total_cost_per_s,"
          "baseline_avg_epdd_ms,baseline_total_cost_per_s,savings_pct,rejected,gap_pct\n";
  cdf << "seed,tm_factor,penalty_per_ms,mu,solver,flow_id,improvement_pct\n";
  timings << "seed,tm_factor,penalty_per_ms,mu,solver,wall_seconds\n";

  std::map<CellKey, CellAgg> agg;
  const bool run_exact =
      cfg.solver == SolverSelection::Exact || cfg.solver == SolverSelection::Both;
  const bool run_tafs_sel =
      cfg.solver == SolverSelection::Tafs || cfg.solver == SolverSelection::Both;

  for (double tm : cfg.tm_factors) {
    for (double penalty : cfg.penalty_sweep) {
      for (std::uint64_t seed : cfg.seeds) {
        GeneratorConfig gc = cfg.gen;
        gc.seed = seed;
        gc.tm_load_factor = tm;
        gc.penalty_per_ms = penalty;
        gc.scenario = cfg.scenario;
        PlacementInstance inst = generate_instance(g, gc);
        for (int mu : mu_list) {
          inst.mu = mu;
          const Metrics base = no_ta_baseline(inst);

          auto emit = [&](const std::string& solver, const Solution& sol, const Metrics& met,
                          double gap_pct, bool have_gap) {
            const double savings =
                base.total_cost > 0
                    ? (base.total_cost - met.total_cost) / base.total_cost * 100.0
                    : 0.0;
            runs << seed << ',' << fmt_double(tm) << ',' << fmt_double(penalty) << ',' << mu
                 << ',' << solver << ',' << to_string(sol.status) << ','
                 << fmt_double(sol.objective) << ',' << fmt_double(met.avg_epdd_ms) << ','
                 << fmt_double(met.improvement_pct) << ',' << fmt_double(met.deploy_cost) << ','
                 << fmt_double(met.penalty_cost) << ',' << fmt_double(met.total_cost) << ','
                 << fmt_double(base.avg_epdd_ms) << ',' << fmt_double(base.total_cost) << ','
                 << fmt_double(savings) << ',' << met.rejected << ','
                 << (have_gap ? fmt_double(gap_pct) : "") << "\n";
            for (size_t i = 0; i < met.per_flow_improvement_pct.size(); ++i)
              cdf << seed << ',' << fmt_double(tm) << ',' << fmt_double(penalty) << ',' << mu
                  << ',' << solver << ',' << i << ','
                  << fmt_double(met.per_flow_improvement_pct[i]) << "\n";
            timings << seed << ',' << fmt_double(tm) << ',' << fmt_double(penalty) << ',' << mu
                    << ',' << solver << ',' << fmt_double(sol.wall_seconds) << "\n";
            CellAgg& c = agg[CellKey{tm, penalty, mu, solver}];
            c.improvement.push_back(csv_round(met.improvement_pct));
            c.avg_epdd.push_back(csv_round(met.avg_epdd_ms));
            c.total_cost.push_back(csv_round(met.total_cost));
            c.savings.push_back(csv_round(savings));
            c.wall.push_back(sol.wall_seconds);
            if (have_gap) c.gap.push_back(csv_round(gap_pct));
          };

          Solution exact_sol;
          bool have_exact = false;
          if (run_exact) {
            IlpModel model = cfg.scenario == Scenario::BestEffort ? build_ilp1(inst)
                                                                  : build_ilp2(inst);
            exact_sol = solve_exact(model, cfg.time_limit_seconds);
            have_exact = exact_sol.status == SolveStatus::Optimal ||
                         exact_sol.status == SolveStatus::TimedOut;
            Metrics met = have_exact && !exact_sol.assignment.empty() &&
                                  exact_sol.rejected_count() < inst.flow_count()
                              ? evaluate(inst, exact_sol)
                              : Metrics{};
            emit("exact", exact_sol, met, 0.0, false);
          }
          if (run_tafs_sel) {
            const TafsVariant variant = cfg.scenario == Scenario::BestEffort
                                            ? TafsVariant::Tafs1
                                            : TafsVariant::Tafs2;
            Solution tsol = run_tafs(inst, variant, cfg.rank_mode);
            Metrics met = evaluate(inst, tsol);
            bool have_gap = false;
            double gap = 0.0;
            if (have_exact && exact_sol.status == SolveStatus::Optimal) {
              gap = compare(tsol, exact_sol, inst).gap_pct;
              have_gap = true;
            }
            emit("tafs", tsol, met, gap, have_gap);
          }
        }
      }
    }
  }
  runs.close();
  cdf.close();
  timings.close();

  std::ofstream rep(res.report_txt);
  rep << "experiment report\n";
  rep << "topology: " << cfg.topology_path << "\n";
  rep << "scenario: " << to_string(cfg.scenario) << ", seeds: " << cfg.seeds.size()
      << " (means with 95% confidence half-widths)\n\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-6s %-10s %-4s %-6s %-22s %-22s %-24s %-18s %s\n", "tm",
                "penalty", "mu", "solver", "improvement_pct", "avg_epdd_ms", "total_cost_per_s",
                "savings_pct", "gap_pct");
  rep << buf;
  for (const auto& [key, c] : agg) {
    auto imp = mean_ci(c.improvement);
    auto ep = mean_ci(c.avg_epdd);
    auto tc = mean_ci(c.total_cost);
    auto sv = mean_ci(c.savings);
    std::string gap_s = "-";
    if (!c.gap.empty()) {
      auto gp = mean_ci(c.gap);
      std::snprintf(buf, sizeof(buf), "%.4f +/- %.4f", gp.mean, gp.ci95);
      gap_s = buf;
    }
    char imp_s[48], ep_s[48], tc_s[48], sv_s[48];
    std::snprintf(imp_s, sizeof(imp_s), "%.4f +/- %.4f", imp.mean, imp.ci95);
    std::snprintf(ep_s, sizeof(ep_s), "%.4f +/- %.4f", ep.mean, ep.ci95);
    std::snprintf(tc_s, sizeof(tc_s), "%.6g +/- %.3g", tc.mean, tc.ci95);
    std::snprintf(sv_s, sizeof(sv_s), "%.4f +/- %.4f", sv.mean, sv.ci95);
    std::snprintf(buf, sizeof(buf), "%-6g %-10g %-4d %-6s %-22s %-22s %-24s %-18s %s\n", key.tm,
                  key.penalty, key.mu, key.solver.c_str(), imp_s, ep_s, tc_s, sv_s,
                  gap_s.c_str());
    rep << buf;
  }
  rep << "\nwall-clock statistics are in timings.csv (excluded from the deterministic outputs)\n";
  return res;
}

}  // namespace tars
