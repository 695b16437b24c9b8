#include "tars/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tars/rng.hpp"

namespace tars {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_interval(const Interval& iv, const char* name) {
  if (!(iv.lo <= iv.hi))
    throw std::invalid_argument(std::string(name) + ": empty interval");
}

// FNV-1a over the fields that define the instance; used to pair solutions
// with the instance they were computed on.
struct Hasher {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(const void* p, size_t n) {
    const unsigned char* c = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) h = (h ^ c[i]) * 1099511628211ull;
  }
  void add(double v) { bytes(&v, sizeof v); }
  void add(int v) { bytes(&v, sizeof v); }
  void add(std::uint64_t v) { bytes(&v, sizeof v); }
  void add(const std::string& s) { bytes(s.data(), s.size()); }
};

std::uint64_t hash_instance(const PlacementInstance& inst, std::uint64_t seed) {
  Hasher h;
  h.add(seed);
  h.add(inst.graph.node_count());
  h.add(inst.graph.link_count());
  for (const auto& n : inst.graph.nodes()) {
    h.add(n.name);
    h.add(n.capacity_mbps.value_or(-1.0));
    h.add(n.unit_cost.value_or(-1.0));
  }
  for (const auto& l : inst.graph.links()) {
    h.add(l.u);
    h.add(l.v);
    h.add(l.bandwidth_mbps);
    h.add(l.delay_ms);
    h.add(l.loss.value_or(-1.0));
  }
  for (const auto& f : inst.flows) {
    h.add(f.src);
    h.add(f.dst);
    h.add(f.bandwidth_mbps);
    h.add(f.sla_ms);
    h.add(f.penalty_per_ms);
  }
  // mu and scenario are run parameters, swept without regenerating flows;
  // the id identifies the network + flow data only.
  return h.h;
}

}  // namespace

std::string to_string(Scenario s) {
  return s == Scenario::BestEffort ? "best_effort" : "qos";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "best_effort" || s == "1") return Scenario::BestEffort;
  if (s == "qos" || s == "2") return Scenario::Qos;
  throw std::invalid_argument("unknown scenario '" + s + "' (use best_effort or qos)");
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::TimedOut: return "timed_out";
  }
  return "unknown";
}

void GeneratorConfig::check() const {
  check_interval(bw_range, "bw_range");
  check_interval(capacity_range, "capacity_range");
  check_interval(cost_range, "cost_range");
  check_interval(loss_range, "loss_range");
  check_interval(sla_factor_range, "sla_factor_range");
  if (bw_range.lo <= 0) throw std::invalid_argument("bw_range must be positive");
  if (capacity_range.lo <= 0) throw std::invalid_argument("capacity_range must be positive");
  if (cost_range.lo < 0) throw std::invalid_argument("cost_range must be non-negative");
  if (loss_range.lo < 0 || loss_range.hi >= 1)
    throw std::invalid_argument("loss_range must lie in [0,1)");
  if (sla_factor_range.lo <= 0) throw std::invalid_argument("sla_factor_range must be positive");
  if (penalty_per_ms < 0) throw std::invalid_argument("penalty_per_ms must be >= 0");
  if (flows_per_pair < 1) throw std::invalid_argument("flows_per_pair must be >= 1");
  if (k_paths < 1) throw std::invalid_argument("k_paths must be >= 1");
  if (tm_load_factor <= 0) throw std::invalid_argument("tm_load_factor must be > 0");
  delay_model.check();
}

double PlacementInstance::delta_of(int flow, int path_index, int ta_node) const {
  const auto& row = delta.at(flow).at(path_index);
  if (ta_node == graph.fictive_id()) return row.back();
  int pos = paths[flow][path_index].position_of(ta_node);
  if (pos < 0)
    throw std::invalid_argument("node " + std::to_string(ta_node) + " not on path " +
                                std::to_string(path_index) + " of flow " + std::to_string(flow));
  return row[pos];
}

bool PlacementInstance::operator==(const PlacementInstance& o) const {
  return graph == o.graph && flows == o.flows && paths == o.paths && delta == o.delta &&
         mu == o.mu && scenario == o.scenario;
}

namespace {

void fill_delta_row(const PathCandidate& path, const DelayModelConfig& cfg,
                    std::vector<double>& row) {
  const size_t len = path.node_seq.size();
  row.resize(len + 1);
  for (size_t k = 0; k < len; ++k)
    row[k] = epdd(path, path.node_seq[k], cfg);
  row[len] = epdd(path, path.fictive_id(), cfg);
}

}  // namespace

void compute_delta_table_serial(PlacementInstance& inst) {
  inst.delta.assign(inst.flows.size(), {});
  for (size_t f = 0; f < inst.flows.size(); ++f) {
    inst.delta[f].resize(inst.paths[f].size());
    for (size_t p = 0; p < inst.paths[f].size(); ++p)
      fill_delta_row(inst.paths[f][p], inst.delay_model, inst.delta[f][p]);
  }
}

void compute_delta_table(PlacementInstance& inst) {
  inst.delta.assign(inst.flows.size(), {});
  std::vector<std::pair<int, int>> cells;
  for (size_t f = 0; f < inst.flows.size(); ++f) {
    inst.delta[f].resize(inst.paths[f].size());
    for (size_t p = 0; p < inst.paths[f].size(); ++p)
      cells.emplace_back(static_cast<int>(f), static_cast<int>(p));
  }
  const long n = static_cast<long>(cells.size());
  // Cells are independent and each writes only its own row, so the schedule
  // cannot affect the values.
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    auto [f, p] = cells[static_cast<size_t>(i)];
    fill_delta_row(inst.paths[f][p], inst.delay_model, inst.delta[f][p]);
  }
}

PlacementInstance generate_instance(const NetworkGraph& g, const GeneratorConfig& cfg) {
  cfg.check();
  {
    auto violations = validate(g);
    if (!violations.empty()) {
      std::string msg = "invalid graph:";
      for (const auto& v : violations) msg += "\n  " + v;
      throw std::invalid_argument(msg);
    }
  }
  if (g.node_count() < 2) throw std::invalid_argument("need at least two nodes");

  PlacementInstance inst;
  inst.graph = g;
  inst.scenario = cfg.scenario;
  inst.delay_model = cfg.delay_model;
  inst.mu = cfg.mu < 0 ? g.node_count() : cfg.mu;

  Rng rng(cfg.seed);
  // Draw order is fixed: capacities, costs, losses, then per ordered pair
  // (lexicographic) per flow: bandwidth, SLA factor.
  for (auto& n : inst.graph.nodes()) {
    if (!n.capacity_mbps)
      n.capacity_mbps = rng.uniform(cfg.capacity_range.lo, cfg.capacity_range.hi);
  }
  for (auto& n : inst.graph.nodes()) {
    if (!n.unit_cost) n.unit_cost = rng.uniform(cfg.cost_range.lo, cfg.cost_range.hi);
  }
  for (auto& l : inst.graph.links()) {
    if (!l.loss) l.loss = rng.uniform(cfg.loss_range.lo, cfg.loss_range.hi);
  }

  // Candidate paths are shared by every flow of a pair; enumerate them first
  // (no RNG involved), in parallel over pairs.
  const int n_nodes = inst.graph.node_count();
  std::vector<std::pair<int, int>> pairs;
  for (int s = 0; s < n_nodes; ++s)
    for (int d = 0; d < n_nodes; ++d)
      if (s != d) pairs.emplace_back(s, d);
  std::vector<std::vector<PathCandidate>> pair_paths(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(pairs.size()); ++i) {
    auto [s, d] = pairs[static_cast<size_t>(i)];
    pair_paths[static_cast<size_t>(i)] =
        k_shortest_paths(inst.graph, s, d, cfg.k_paths, cfg.max_hops);
  }
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (pair_paths[i].empty())
      throw std::invalid_argument("max_hops=" + std::to_string(cfg.max_hops) +
                                  " leaves no candidate path for pair " +
                                  std::to_string(pairs[i].first) + "->" +
                                  std::to_string(pairs[i].second));
  }

  const double bw_lo = cfg.bw_range.lo * cfg.tm_load_factor;
  const double bw_hi = cfg.bw_range.hi * cfg.tm_load_factor;
  for (size_t i = 0; i < pairs.size(); ++i) {
    const auto& paths = pair_paths[i];
    // paths[0] is the pair's shortest path.
    const double base_delay = cfg.sla_basis == SlaBasis::Epdd
                                  ? epdd(paths[0], paths[0].fictive_id(), cfg.delay_model)
                                  : paths[0].total_delay_ms;
    for (int j = 0; j < cfg.flows_per_pair; ++j) {
      Flow f;
      f.id = static_cast<int>(inst.flows.size());
      f.src = pairs[i].first;
      f.dst = pairs[i].second;
      f.bandwidth_mbps = rng.uniform(bw_lo, bw_hi);
      f.sla_ms = rng.uniform(cfg.sla_factor_range.lo, cfg.sla_factor_range.hi) * base_delay;
      f.penalty_per_ms = cfg.penalty_per_ms;
      inst.flows.push_back(f);
      inst.paths.push_back(paths);
    }
  }

  compute_delta_table(inst);
  inst.instance_id = hash_instance(inst, cfg.seed);
  return inst;
}

void save_instance(const PlacementInstance& inst, const std::string& path, bool include_delta) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write instance file: " + path);
  f << "tars-instance 1\n";
  char idbuf[20];
  std::snprintf(idbuf, sizeof(idbuf), "%016llx",
                static_cast<unsigned long long>(inst.instance_id));
  f << "id " << idbuf << "\n";
  f << "scenario " << to_string(inst.scenario) << "\n";
  f << "mu " << inst.mu << "\n";
  f << "delay_model " << fmt_double(inst.delay_model.tail_epsilon) << ' '
    << inst.delay_model.max_retx << ' ' << fmt_double(inst.delay_model.rto_multiplier) << "\n";
  f << "graph " << inst.graph.node_count() << ' ' << inst.graph.link_count() << "\n";
  std::istringstream topo(serialize_plain(inst.graph));
  std::string line;
  while (std::getline(topo, line)) f << line << "\n";
  f << "flows " << inst.flows.size() << "\n";
  for (const auto& fl : inst.flows)
    f << "flow " << fl.id << ' ' << fl.src << ' ' << fl.dst << ' '
      << fmt_double(fl.bandwidth_mbps) << ' ' << fmt_double(fl.sla_ms) << ' '
      << fmt_double(fl.penalty_per_ms) << "\n";
  for (size_t fi = 0; fi < inst.paths.size(); ++fi) {
    f << "paths " << fi << ' ' << inst.paths[fi].size() << "\n";
    for (const auto& p : inst.paths[fi]) {
      f << "path";
      for (int n : p.node_seq) f << ' ' << n;
      f << "\n";
    }
  }
  if (include_delta) {
    for (size_t fi = 0; fi < inst.delta.size(); ++fi)
      for (size_t pi = 0; pi < inst.delta[fi].size(); ++pi) {
        f << "delta " << fi << ' ' << pi;
        for (double v : inst.delta[fi][pi]) f << ' ' << fmt_double(v);
        f << "\n";
      }
  }
  f << "end\n";
  if (!f) throw std::runtime_error("write failure: " + path);
}

PlacementInstance load_instance(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open instance file: " + path);
  PlacementInstance inst;
  std::string line;
  int line_no = 0;
  bool saw_end = false;
  bool have_delta = false;

  auto next_line = [&](std::vector<std::string>& toks) -> bool {
    while (std::getline(f, line)) {
      ++line_no;
      std::istringstream is(line);
      toks.clear();
      std::string t;
      while (is >> t) toks.push_back(t);
      if (!toks.empty()) return true;
    }
    return false;
  };

  std::vector<std::string> toks;
  if (!next_line(toks) || toks.size() != 2 || toks[0] != "tars-instance")
    throw ParseError("not a tars-instance file", line_no);
  if (toks[1] != "1")
    throw ParseError("unsupported instance file version '" + toks[1] + "'", line_no);

  std::string topo_text;
  int expected_flows = -1;
  std::uint64_t file_id = 0;
  while (next_line(toks)) {
    const std::string& key = toks[0];
    try {
      if (key == "id") {
        file_id = std::stoull(toks.at(1), nullptr, 16);
      } else if (key == "scenario") {
        inst.scenario = scenario_from_string(toks.at(1));
      } else if (key == "mu") {
        inst.mu = std::stoi(toks.at(1));
      } else if (key == "delay_model") {
        inst.delay_model.tail_epsilon = std::stod(toks.at(1));
        inst.delay_model.max_retx = std::stoi(toks.at(2));
        inst.delay_model.rto_multiplier = std::stod(toks.at(3));
      } else if (key == "graph") {
        int nn = std::stoi(toks.at(1)), nl = std::stoi(toks.at(2));
        // The next nn + nl non-empty lines are the plain topology.
        std::ostringstream topo;
        for (int i = 0; i < nn + nl; ++i) {
          if (!next_line(toks)) throw ParseError("truncated graph section", line_no);
          topo << line << "\n";
        }
        inst.graph = load_plain(topo.str());
        if (inst.graph.node_count() != nn || inst.graph.link_count() != nl)
          throw ParseError("graph section does not match its declared size", line_no);
      } else if (key == "flows") {
        expected_flows = std::stoi(toks.at(1));
      } else if (key == "flow") {
        Flow fl;
        fl.id = std::stoi(toks.at(1));
        fl.src = std::stoi(toks.at(2));
        fl.dst = std::stoi(toks.at(3));
        fl.bandwidth_mbps = std::stod(toks.at(4));
        fl.sla_ms = std::stod(toks.at(5));
        fl.penalty_per_ms = std::stod(toks.at(6));
        if (fl.id != static_cast<int>(inst.flows.size()))
          throw ParseError("flow ids out of order", line_no);
        inst.flows.push_back(fl);
        inst.paths.emplace_back();
        inst.delta.emplace_back();
      } else if (key == "paths") {
        size_t fi = static_cast<size_t>(std::stoul(toks.at(1)));
        size_t count = static_cast<size_t>(std::stoul(toks.at(2)));
        if (fi >= inst.flows.size()) throw ParseError("paths for unknown flow", line_no);
        for (size_t i = 0; i < count; ++i) {
          if (!next_line(toks) || toks[0] != "path")
            throw ParseError("expected a path line", line_no);
          std::vector<int> seq;
          for (size_t t = 1; t < toks.size(); ++t) seq.push_back(std::stoi(toks[t]));
          inst.paths[fi].push_back(build_path(inst.graph, seq));
        }
        inst.delta[fi].resize(count);
      } else if (key == "delta") {
        size_t fi = static_cast<size_t>(std::stoul(toks.at(1)));
        size_t pi = static_cast<size_t>(std::stoul(toks.at(2)));
        if (fi >= inst.paths.size() || pi >= inst.paths[fi].size())
          throw ParseError("delta for unknown (flow, path)", line_no);
        std::vector<double> row;
        for (size_t t = 3; t < toks.size(); ++t) row.push_back(std::stod(toks[t]));
        if (row.size() != inst.paths[fi][pi].node_seq.size() + 1)
          throw ParseError("delta row has wrong length", line_no);
        inst.delta[fi][pi] = std::move(row);
        have_delta = true;
      } else if (key == "end") {
        saw_end = true;
        break;
      } else {
        throw ParseError("unknown record '" + key + "'", line_no);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(std::string("bad record: ") + e.what(), line_no);
    }
  }
  if (!saw_end) throw ParseError("truncated instance file (missing 'end')", line_no);
  if (expected_flows >= 0 && expected_flows != static_cast<int>(inst.flows.size()))
    throw ParseError("flow count does not match the declared total", line_no);
  if (!have_delta)
    compute_delta_table(inst);
  inst.instance_id = file_id;
  return inst;
}

void write_flow_csv(const PlacementInstance& inst, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write flow csv: " + path);
  f << "flow_id,src,dst,bandwidth_mbps,sla_ms,penalty_per_ms\n";
  for (const auto& fl : inst.flows)
    f << fl.id << ',' << fl.src << ',' << fl.dst << ',' << fmt_double(fl.bandwidth_mbps) << ','
      << fmt_double(fl.sla_ms) << ',' << fmt_double(fl.penalty_per_ms) << "\n";
}

Solution no_ta_route(const PlacementInstance& inst) {
  const int nf = inst.flow_count();
  Solution sol;
  sol.status = SolveStatus::Feasible;
  sol.assignment.assign(nf, std::nullopt);
  sol.instance_id = inst.instance_id;

  std::vector<int> order(nf);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (inst.flows[a].bandwidth_mbps != inst.flows[b].bandwidth_mbps)
      return inst.flows[a].bandwidth_mbps > inst.flows[b].bandwidth_mbps;
    return a < b;
  });

  std::vector<double> link_rem;
  link_rem.reserve(inst.graph.link_count());
  for (const auto& l : inst.graph.links()) link_rem.push_back(l.bandwidth_mbps);

  const int fictive = inst.graph.fictive_id();
  double objective = 0.0;
  for (int f : order) {
    // Paths by ascending no-TA delay; ties by node sequence.
    std::vector<int> pidx(inst.paths[f].size());
    std::iota(pidx.begin(), pidx.end(), 0);
    std::sort(pidx.begin(), pidx.end(), [&](int a, int b) {
      double da = inst.delta[f][a].back(), db = inst.delta[f][b].back();
      if (da != db) return da < db;
      return inst.paths[f][a].node_seq < inst.paths[f][b].node_seq;
    });
    for (int p : pidx) {
      const auto& cand = inst.paths[f][p];
      bool fits = true;
      for (int lid : cand.link_seq)
        if (link_rem[lid] < inst.flows[f].bandwidth_mbps) {
          fits = false;
          break;
        }
      if (!fits) continue;
      for (int lid : cand.link_seq) link_rem[lid] -= inst.flows[f].bandwidth_mbps;
      sol.assignment[f] = FlowAssignment{p, fictive};
      objective += inst.delta[f][p].back();
      break;
    }
  }
  int assigned = nf - sol.rejected_count();
  sol.objective = assigned > 0 ? objective / nf : 0.0;
  return sol;
}

Metrics no_ta_baseline(const PlacementInstance& inst) {
  Solution sol = no_ta_route(inst);
  Metrics m;
  m.rejected = sol.rejected_count();
  m.flow_epdd_ms.assign(inst.flows.size(), std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  int assigned = 0;
  for (int f = 0; f < inst.flow_count(); ++f) {
    if (!sol.assignment[f]) continue;
    double d = inst.delta[f][sol.assignment[f]->path_index].back();
    m.flow_epdd_ms[f] = d;
    sum += d;
    ++assigned;
    m.penalty_cost += inst.flows[f].penalty_per_ms * std::max(0.0, d - inst.flows[f].sla_ms);
  }
  m.avg_epdd_ms = assigned > 0 ? sum / assigned : 0.0;
  m.total_cost = m.penalty_cost;
  return m;
}

}  // namespace tars
