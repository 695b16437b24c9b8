// Acceptance suite. Each criterion prints one PASS/FAIL line with the
// measured quantity and its pinned threshold; the process exits non-zero if
// any automated criterion fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "support.hpp"
#include "tars/bench.hpp"
#include "tars/epdd.hpp"
#include "tars/instance.hpp"
#include "tars/milp.hpp"
#include "tars/tafs.hpp"

using namespace tars;

namespace {

const std::string kAbilene = std::string(TARS_DATA_DIR) + "/abilene.net";

// Abilene-scale experiment shape shared by criteria 5-7.
constexpr int kSeeds = 20;
constexpr int kFlowsPerPair = 5;
constexpr double kSolveLimitSeconds = 600.0;

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

PathCandidate random_chain(Rng& rng, NetworkGraph& g, double max_loss) {
  const int hops = 2 + static_cast<int>(rng.next_u64() % 5);
  g = NetworkGraph{};
  for (int i = 0; i <= hops; ++i) g.add_node({-1, "n" + std::to_string(i), {}, {}, {}});
  std::vector<int> seq;
  for (int i = 0; i <= hops; ++i) seq.push_back(i);
  for (int i = 0; i < hops; ++i)
    g.add_link(i, i + 1, 100.0, rng.uniform(1, 20), rng.uniform(0, max_loss));
  return build_path(g, seq);
}

PlacementInstance abilene_instance(std::uint64_t seed, double penalty = 5e-5) {
  static const NetworkGraph g = load_topology_file(kAbilene);
  GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.flows_per_pair = kFlowsPerPair;
  cfg.penalty_per_ms = penalty;
  return generate_instance(g, cfg);
}

// --- criterion 1: truncated sum vs closed form -----------------------------
Result criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double d1 = rng.uniform(0, 100);
    const double d2 = rng.uniform(0, 100);
    const double q1 = rng.uniform(0, 0.3);
    const double q2 = rng.uniform(0, 0.3);
    const double a = epdd_segments(d1, q1, d2, q2);
    const double b = epdd_closed_form_segments(d1, q1, d2, q2);
    if (b > 0) worst = std::max(worst, std::abs(a - b) / b);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Result r;
  r.pass = worst <= 1e-9 && secs < 1.0;
  r.detail = fmt("max rel err %.3g (limit 1e-9), %.3f s (limit 1 s)", worst, secs);
  return r;
}

// --- criterion 2: Monte Carlo agreement ------------------------------------
Result criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(202);
  int ok = 0;
  double worst_sigma = 0.0;
  for (int i = 0; i < 50; ++i) {
    NetworkGraph g;
    PathCandidate p = random_chain(rng, g, 0.3);
    const int ta = p.node_seq[rng.next_u64() % p.node_seq.size()];
    const double analytic = epdd(p, ta);
    McEstimate mc = monte_carlo_epdd(p, ta, 100000, 1000 + i);
    const double sigmas =
        mc.std_err_ms > 0 ? std::abs(analytic - mc.mean_ms) / mc.std_err_ms : 0.0;
    worst_sigma = std::max(worst_sigma, sigmas);
    if (sigmas <= 3.0) ++ok;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Result r;
  r.pass = ok == 50 && secs < 30.0;
  r.detail = fmt("%d/50 paths within 3 std errs (worst %.2f), %.1f s (limit 30 s)", ok,
                 worst_sigma, secs);
  return r;
}

// --- criterion 3: TA never hurts + the triple-delay anchor -----------------
Result criterion3() {
  Rng rng(303);
  int ok = 0;
  for (int i = 0; i < 100; ++i) {
    NetworkGraph g;
    PathCandidate p = random_chain(rng, g, 0.3);
    const double no_ta = epdd(p, p.fictive_id());
    double best = no_ta;
    for (int node : p.node_seq) best = std::min(best, epdd(p, node));
    if (best <= no_ta + 1e-9) ++ok;
  }
  bool anchor = true;
  for (double d : {1.0, 7.5, 12.25, 100.0})
    anchor = anchor && delta(LossSplit{1, 0}, d, 0.0) == 3.0 * d;
  Result r;
  r.pass = ok == 100 && anchor;
  r.detail = fmt("%d/100 paths, single-loss delivery == 3x one-way delay: %s", ok,
                 anchor ? "exact" : "VIOLATED");
  return r;
}

// --- criterion 4: exact solver vs exhaustive enumeration -------------------
Result criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  int checked = 0, agree = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    PlacementInstance inst = testsupport::micro_instance(seed);
    for (int kind : {1, 2}) {
      IlpModel m = kind == 1 ? build_ilp1(inst) : build_ilp2(inst);
      const auto expect = testsupport::enumerate_best(m);
      Solution got = solve_exact(m, 30.0);
      ++checked;
      if (!expect.feasible) {
        agree += got.status == SolveStatus::Infeasible;
      } else {
        agree += got.status == SolveStatus::Optimal &&
                 std::abs(got.objective - expect.objective) <=
                     1e-9 * std::max(1.0, std::abs(expect.objective));
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Result r;
  r.pass = agree == checked && secs < 60.0;
  r.detail = fmt("%d/%d models match enumeration, %.1f s (limit 60 s)", agree, checked, secs);
  return r;
}

// --- criterion 5: mu sweep monotonicity and improvement band ---------------
Result criterion5() {
  const std::vector<int> mu_grid{0, 2, 4, 6, 8, 10, 12};
  bool monotone = true;
  bool all_optimal = true;
  std::vector<double> improvements;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    PlacementInstance inst = abilene_instance(seed);
    double prev = std::numeric_limits<double>::infinity();
    for (int mu : mu_grid) {
      inst.mu = mu;
      Solution sol = solve_exact(build_ilp1(inst), kSolveLimitSeconds);
      if (sol.status != SolveStatus::Optimal) {
        all_optimal = false;
        break;
      }
      if (sol.objective > prev + 1e-9) monotone = false;
      prev = sol.objective;
      if (mu == 12) improvements.push_back(evaluate(inst, sol).improvement_pct);
    }
  }
  MeanCi imp = mean_ci(improvements);
  Result r;
  r.pass = all_optimal && monotone && improvements.size() == kSeeds && imp.mean >= 5.0 &&
           imp.mean <= 30.0;
  r.detail = fmt("%s%s, mean improvement at mu=12: %.2f%% (band [5, 30])",
                 all_optimal ? "all optima proven" : "SOLVER TIMED OUT",
                 monotone ? ", non-increasing in mu" : ", MONOTONICITY VIOLATED", imp.mean);
  return r;
}

// --- criterion 6: heuristic gaps and runtime --------------------------------
// TAFS1 vs ILP1 averaged over the TA-budget sweep; TAFS2 vs ILP2 averaged
// over the penalty sweep at full deployment, mirroring how the two
// comparisons are framed.
Result criterion6() {
  std::vector<double> gap1, gap2;
  double worst_wall = 0.0;
  bool exact_ok = true;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    PlacementInstance inst = abilene_instance(seed);
    for (int mu : {2, 4, 6, 8, 10, 12}) {
      inst.mu = mu;
      Solution e1 = solve_exact(build_ilp1(inst), kSolveLimitSeconds);
      TafsSolution t1 = run_tafs(inst, TafsVariant::Tafs1);
      worst_wall = std::max(worst_wall, t1.wall_seconds);
      if (e1.status == SolveStatus::Optimal)
        gap1.push_back(compare(t1, e1, inst).gap_pct);
      else
        exact_ok = false;
    }
    for (double theta : {5e-5, 10e-5, 15e-5}) {
      PlacementInstance qinst = abilene_instance(seed, theta);
      qinst.mu = 12;
      Solution e2 = solve_exact(build_ilp2(qinst), kSolveLimitSeconds);
      TafsSolution t2 = run_tafs(qinst, TafsVariant::Tafs2);
      worst_wall = std::max(worst_wall, t2.wall_seconds);
      if (e2.status == SolveStatus::Optimal) {
        // Cost gap relative to the no-TA baseline total keeps the measure
        // finite when the optimal cost is zero.
        const double base = evaluate(qinst, no_ta_route(qinst)).total_cost;
        const double denom = std::max(std::abs(e2.objective), std::max(base, 1e-12));
        gap2.push_back((t2.objective - e2.objective) / denom * 100.0);
      } else {
        exact_ok = false;
      }
    }
  }
  MeanCi g1 = mean_ci(gap1);
  MeanCi g2 = mean_ci(gap2);
  Result r;
  r.pass = exact_ok && g1.mean <= 5.0 && g2.mean <= 2.0 && worst_wall < 1.0;
  r.detail = fmt("mean TAFS1 gap %.3f%% over the mu sweep (limit 5%%), mean TAFS2 gap %.3f%% "
                 "over the penalty sweep (limit 2%%), worst TAFS wall %.3f s (limit 1 s)%s",
                 g1.mean, g2.mean, worst_wall, exact_ok ? "" : ", EXACT SOLVER TIMED OUT");
  return r;
}

// --- criterion 7: scenario-2 dominance and penalty-sweep savings ------------
Result criterion7() {
  const std::vector<double> penalties{5e-5, 10e-5, 15e-5};
  bool dominated = true;
  bool strict = true;
  bool all_optimal = true;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    double prev_savings = -std::numeric_limits<double>::infinity();
    for (double theta : penalties) {
      PlacementInstance inst = abilene_instance(seed, theta);
      inst.mu = 12;
      Solution sol = solve_exact(build_ilp2(inst), kSolveLimitSeconds);
      if (sol.status != SolveStatus::Optimal) {
        all_optimal = false;
        continue;
      }
      const double base_total = no_ta_baseline(inst).total_cost;
      const double with_tas = evaluate(inst, sol).total_cost;
      if (with_tas > base_total + 1e-12) dominated = false;
      const double savings = base_total > 0 ? (base_total - with_tas) / base_total * 100.0 : 0.0;
      if (savings <= prev_savings) strict = false;
      prev_savings = savings;
    }
  }
  Result r;
  r.pass = dominated && strict && all_optimal;
  r.detail = fmt("cost with TAs <= baseline on every instance: %s; savings strictly "
                 "increasing over {5,10,15}e-5 $/ms: %s%s",
                 dominated ? "yes" : "NO", strict ? "yes" : "NO",
                 all_optimal ? "" : "; SOLVER TIMED OUT");
  return r;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    std::function<Result()> fn;
  };
  const std::vector<Entry> criteria{
      {"C1 delay-model oracle agreement", criterion1},
      {"C2 Monte Carlo agreement", criterion2},
      {"C3 TA-never-hurts + 3x anchor", criterion3},
      {"C4 exact solver vs enumeration", criterion4},
      {"C5 mu-sweep monotonicity + improvement band", criterion5},
      {"C6 heuristic optimality gaps", criterion6},
      {"C7 scenario-2 dominance + penalty sweep", criterion7},
  };

  int passed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Result r = c.fn();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %-45s %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", c.name, r.detail.c_str(),
                secs);
    std::fflush(stdout);
    if (r.pass) ++passed;
  }
  std::printf("[----] C8 cross-solver LP check is manual: see scripts/cross_check.py and the "
              "README\n");
  std::printf("ACCEPTANCE: %d/%zu criteria passed\n", passed, criteria.size());
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
