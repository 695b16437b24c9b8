// Compares the OpenMP kernels against their serial references: delta-table
// fill, TAFS pair-list construction, and the Monte Carlo delay oracle. The
// parallel results must match the serial ones exactly; timings and speedups
// are printed as a table.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "tars/epdd.hpp"
#include "tars/instance.hpp"
#include "tars/tafs.hpp"

namespace {

double time_best_of(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best,
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s, bool equal) {
  std::printf("%-22s %12.4f ms %12.4f ms %8.2fx   %s\n", name, serial_s * 1e3, parallel_s * 1e3,
              serial_s / parallel_s, equal ? "match" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tars kernel benchmark: serial reference vs OpenMP"};
  std::string topology = "data/abilene.net";
  std::uint64_t seed = 1;
  int flows_per_pair = 5;
  int repeats = 5;
  long packets = 2'000'000;
  app.add_option("--topology", topology, "topology file");
  app.add_option("--seed", seed, "instance seed");
  app.add_option("--flows-per-pair", flows_per_pair, "flows per ordered pair");
  app.add_option("--repeat", repeats, "timing repetitions (best kept)");
  app.add_option("--packets", packets, "Monte Carlo packets");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    tars::NetworkGraph g = tars::load_topology_file(topology);
    tars::GeneratorConfig gc;
    gc.seed = seed;
    gc.flows_per_pair = flows_per_pair;
    tars::PlacementInstance inst = tars::generate_instance(g, gc);

#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (compiled without OpenMP)\n");
#endif
    std::printf("instance: %d nodes, %d links, %d flows\n\n", g.node_count(), g.link_count(),
                inst.flow_count());
    std::printf("%-22s %15s %15s %9s\n", "kernel", "serial", "parallel", "speedup");

    {
      tars::PlacementInstance a = inst, b = inst;
      double ts = time_best_of(repeats, [&] { tars::compute_delta_table_serial(a); });
      double tp = time_best_of(repeats, [&] { tars::compute_delta_table(b); });
      report("delta_table", ts, tp, a.delta == b.delta);
    }
    {
      std::vector<std::vector<tars::PairChoice>> ls, lp;
      double ts = time_best_of(
          repeats, [&] { ls = tars::build_pair_lists_serial(inst, tars::TafsVariant::Tafs1); });
      double tp =
          time_best_of(repeats, [&] { lp = tars::build_pair_lists(inst, tars::TafsVariant::Tafs1); });
      bool equal = ls.size() == lp.size();
      for (size_t f = 0; equal && f < ls.size(); ++f) {
        equal = ls[f].size() == lp[f].size();
        for (size_t i = 0; equal && i < ls[f].size(); ++i)
          equal = ls[f][i].path_index == lp[f][i].path_index &&
                  ls[f][i].ta_node == lp[f][i].ta_node && ls[f][i].benefit == lp[f][i].benefit;
      }
      report("pair_lists", ts, tp, equal);
    }
    {
      const tars::PathCandidate& p = inst.paths[0][0];
      const int mid = p.node_seq[p.node_seq.size() / 2];
      tars::McEstimate es, ep;
      double ts = time_best_of(repeats, [&] {
        es = tars::monte_carlo_epdd(p, mid, packets, seed, {}, /*parallel=*/false);
      });
      double tp = time_best_of(repeats, [&] {
        ep = tars::monte_carlo_epdd(p, mid, packets, seed, {}, /*parallel=*/true);
      });
      report("monte_carlo", ts, tp, es.mean_ms == ep.mean_ms && es.std_err_ms == ep.std_err_ms);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
