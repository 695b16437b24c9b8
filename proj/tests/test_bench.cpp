#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tars/bench.hpp"
#include "tars/milp.hpp"
#include "tars/tafs.hpp"

using namespace tars;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string temp_dir(const char* name) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(p);
  return p.string();
}

std::string write_config(const std::string& body) {
  auto p = std::filesystem::temp_directory_path() / "tars_bench_cfg.txt";
  std::ofstream f(p);
  f << body;
  return p.string();
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("config parsing applies defaults and rejects bad input") {
  const std::string path = write_config(
      "topology = " + std::string(TARS_DATA_DIR) + "/triangle.txt\n"
      "seeds = 1 2\n"
      "mu_sweep = 0 1 2\n"
      "flows_per_pair = 1\n"
      "solver = both\n");
  ExperimentConfig cfg = load_experiment_config(path);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(cfg.mu_sweep == std::vector<int>{0, 1, 2});
  CHECK(cfg.tm_factors == std::vector<double>{1.0});         // defaulted
  CHECK(cfg.penalty_sweep == std::vector<double>{5e-5});     // defaulted to the rate
  cfg.check();

  // An explicitly empty sweep is a config error.
  const std::string bad = write_config(
      "topology = x\n"
      "mu_sweep =\n");
  CHECK_THROWS_AS(load_experiment_config(bad), ParseError);

  ExperimentConfig dup;
  dup.topology_path = "x";
  dup.seeds = {1, 1};
  dup.penalty_sweep = {5e-5};
  dup.tm_factors = {1.0};
  CHECK_THROWS_WITH_AS(dup.check(), doctest::Contains("distinct"), std::invalid_argument);
}

TEST_CASE("unknown keys are rejected with a line number") {
  const std::string path = write_config("topology = x\nbogus_key = 1\n");
  try {
    load_experiment_config(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("a small experiment writes consistent, reproducible outputs") {
  const std::string out1 = temp_dir("tars_bench_out1");
  const std::string out2 = temp_dir("tars_bench_out2");
  const std::string cfg_path = write_config(
      "topology = " + std::string(TARS_DATA_DIR) + "/triangle.txt\n"
      "seeds = 1 2 3\n"
      "mu_sweep = 0 3\n"
      "flows_per_pair = 1\n"
      "scenario = qos\n"
      "solver = both\n"
      "time_limit_s = 30\n");
  ExperimentConfig cfg = load_experiment_config(cfg_path);

  cfg.output_dir = out1;
  ExperimentResult r1 = run_experiment(cfg);
  cfg.output_dir = out2;
  ExperimentResult r2 = run_experiment(cfg);

  const std::string runs1 = read_file(r1.runs_csv);
  CHECK(runs1 == read_file(r2.runs_csv));              // byte-identical reruns
  CHECK(read_file(r1.cdf_csv) == read_file(r2.cdf_csv));

  // One row per (seed, mu, solver) plus the header.
  CHECK(count_lines(runs1) == 1 + 3 * 2 * 2);

  // Spot-check that the report's mean is recomputable from the CSV.
  std::istringstream is(runs1);
  std::string line;
  std::getline(is, line);  // header
  std::vector<double> improvements_mu3_exact;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells[3] == "3" && cells[4] == "exact")
      improvements_mu3_exact.push_back(std::stod(cells[8]));
  }
  REQUIRE(improvements_mu3_exact.size() == 3);
  MeanCi mc = mean_ci(improvements_mu3_exact);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f +/- %.4f", mc.mean, mc.ci95);
  CHECK(read_file(r1.report_txt).find(buf) != std::string::npos);

  std::filesystem::remove_all(out1);
  std::filesystem::remove_all(out2);
}

TEST_CASE("compare: identical solutions have zero gap") {
  NetworkGraph g = load_topology_file(std::string(TARS_DATA_DIR) + "/triangle.txt");
  GeneratorConfig gc;
  gc.seed = 1;
  gc.flows_per_pair = 1;
  PlacementInstance inst = generate_instance(g, gc);
  Solution s = solve_exact(build_ilp1(inst));
  REQUIRE(s.status == SolveStatus::Optimal);
  GapReport r = compare(s, s, inst);
  CHECK(r.gap_pct == 0.0);
  CHECK(r.assignment_diffs == 0);
}

TEST_CASE("compare: single-flow TAFS1 matches the exact solver") {
  NetworkGraph g = load_topology_file(std::string(TARS_DATA_DIR) + "/triangle.txt");
  GeneratorConfig gc;
  gc.seed = 2;
  gc.flows_per_pair = 1;
  PlacementInstance inst = generate_instance(g, gc);
  inst.flows.resize(1);
  inst.paths.resize(1);
  inst.delta.resize(1);
  Solution e = solve_exact(build_ilp1(inst));
  TafsSolution t = run_tafs(inst, TafsVariant::Tafs1);
  GapReport r = compare(t, e, inst);
  CHECK(r.gap_pct == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("compare: the heuristic gap is never negative against an optimum") {
  NetworkGraph g = load_topology_file(std::string(TARS_DATA_DIR) + "/triangle.txt");
  for (std::uint64_t seed : {3ull, 4ull, 5ull}) {
    GeneratorConfig gc;
    gc.seed = seed;
    gc.flows_per_pair = 2;
    PlacementInstance inst = generate_instance(g, gc);
    Solution e = solve_exact(build_ilp1(inst));
    TafsSolution t = run_tafs(inst, TafsVariant::Tafs1);
    if (e.status != SolveStatus::Optimal || t.rejected_count() > 0) continue;
    CHECK(compare(t, e, inst).gap_pct >= -1e-9);
  }
}

TEST_CASE("compare rejects mismatched instances") {
  NetworkGraph g = load_topology_file(std::string(TARS_DATA_DIR) + "/triangle.txt");
  GeneratorConfig gc;
  gc.seed = 1;
  gc.flows_per_pair = 1;
  PlacementInstance a = generate_instance(g, gc);
  gc.seed = 2;
  PlacementInstance b = generate_instance(g, gc);
  Solution sa = solve_exact(build_ilp1(a));
  Solution sb = solve_exact(build_ilp1(b));
  CHECK_THROWS_AS(compare(sa, sb, a), std::invalid_argument);
}

TEST_CASE("mean_ci: degenerate and standard cases") {
  CHECK(mean_ci({}).mean == 0.0);
  CHECK(mean_ci({5.0}).mean == 5.0);
  CHECK(mean_ci({5.0}).ci95 == 0.0);
  MeanCi mc = mean_ci({1, 2, 3, 4});
  CHECK(mc.mean == doctest::Approx(2.5));
  // sd = sqrt(5/3), half-width = 1.96 * sd / 2
  CHECK(mc.ci95 == doctest::Approx(1.96 * std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-12));
}
