#include "tars/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace tars {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

IlpModel build_model(const PlacementInstance& inst, int kind) {
  IlpModel m;
  m.objective_kind = kind;
  m.num_real_nodes = inst.graph.node_count();
  m.num_links = inst.graph.link_count();
  m.mu = inst.mu;
  m.instance_id = inst.instance_id;
  for (const auto& n : inst.graph.nodes()) m.node_capacity.push_back(n.capacity_mbps.value_or(0));
  for (const auto& l : inst.graph.links()) m.link_capacity.push_back(l.bandwidth_mbps);

  const int nf = inst.flow_count();
  const int fictive = inst.graph.fictive_id();
  const double inv_flows = nf > 0 ? 1.0 / nf : 0.0;
  m.flow_y.resize(nf);
  m.flow_path_links.resize(nf);
  for (int f = 0; f < nf; ++f) {
    const Flow& fl = inst.flows[f];
    m.flow_bandwidth.push_back(fl.bandwidth_mbps);
    for (size_t p = 0; p < inst.paths[f].size(); ++p) {
      const PathCandidate& path = inst.paths[f][p];
      m.flow_path_links[f].push_back(path.link_seq);
      auto add_y = [&](int node, double delta_ms) {
        IlpModel::YVar y;
        y.flow = f;
        y.path_index = static_cast<int>(p);
        y.ta_node = node;
        if (kind == 1) {
          y.coef = delta_ms * inv_flows;
        } else {
          const double alpha = node == fictive ? 0.0 : *inst.graph.node(node).unit_cost;
          y.coef = alpha * fl.bandwidth_mbps +
                   fl.penalty_per_ms * std::max(delta_ms - fl.sla_ms, 0.0);
        }
        m.flow_y[f].push_back(static_cast<int>(m.y.size()));
        m.y.push_back(y);
      };
      for (size_t pos = 0; pos < path.node_seq.size(); ++pos)
        add_y(path.node_seq[pos], inst.delta[f][p][pos]);
      add_y(fictive, inst.delta[f][p].back());
    }
  }

  // Constraint rows, in formulation order. Each flow picks exactly one
  // (path, node) option; a real-node option forces its x on; x is forced off
  // when unused; node and link capacities; the TA budget over real nodes.
  const int N = m.num_real_nodes;
  auto ycol = [&](int yi) { return N + yi; };
  for (int f = 0; f < nf; ++f) {
    IlpModel::Row r;
    r.name = "assign_f" + std::to_string(f);
    for (int yi : m.flow_y[f]) r.terms.emplace_back(ycol(yi), 1.0);
    r.sense = 'E';
    r.rhs = 1.0;
    m.rows.push_back(std::move(r));
  }
  for (size_t yi = 0; yi < m.y.size(); ++yi) {
    const auto& y = m.y[yi];
    if (y.ta_node == fictive) continue;
    IlpModel::Row r;
    r.name = "couple_f" + std::to_string(y.flow) + "_p" + std::to_string(y.path_index) + "_n" +
             std::to_string(y.ta_node);
    r.terms.emplace_back(ycol(static_cast<int>(yi)), 1.0);
    r.terms.emplace_back(y.ta_node, -1.0);
    r.sense = 'L';
    r.rhs = 0.0;
    m.rows.push_back(std::move(r));
  }
  for (int n = 0; n < N; ++n) {
    IlpModel::Row r;
    r.name = "open_n" + std::to_string(n);
    r.terms.emplace_back(n, 1.0);
    for (size_t yi = 0; yi < m.y.size(); ++yi)
      if (m.y[yi].ta_node == n) r.terms.emplace_back(ycol(static_cast<int>(yi)), -1.0);
    r.sense = 'L';
    r.rhs = 0.0;
    m.rows.push_back(std::move(r));
  }
  for (int n = 0; n < N; ++n) {
    IlpModel::Row r;
    r.name = "nodecap_n" + std::to_string(n);
    for (size_t yi = 0; yi < m.y.size(); ++yi)
      if (m.y[yi].ta_node == n)
        r.terms.emplace_back(ycol(static_cast<int>(yi)), m.flow_bandwidth[m.y[yi].flow]);
    r.sense = 'L';
    r.rhs = m.node_capacity[n];
    m.rows.push_back(std::move(r));
  }
  for (int l = 0; l < m.num_links; ++l) {
    IlpModel::Row r;
    r.name = "linkcap_l" + std::to_string(l);
    for (size_t yi = 0; yi < m.y.size(); ++yi) {
      const auto& y = m.y[yi];
      const auto& links = m.flow_path_links[y.flow][y.path_index];
      if (std::find(links.begin(), links.end(), l) != links.end())
        r.terms.emplace_back(ycol(static_cast<int>(yi)), m.flow_bandwidth[y.flow]);
    }
    if (!r.terms.empty()) {
      r.sense = 'L';
      r.rhs = m.link_capacity[l];
      m.rows.push_back(std::move(r));
    }
  }
  {
    IlpModel::Row r;
    r.name = "mu";
    for (int n = 0; n < N; ++n) r.terms.emplace_back(n, 1.0);
    r.sense = 'L';
    r.rhs = m.mu;
    m.rows.push_back(std::move(r));
  }
  return m;
}

}  // namespace

IlpModel build_ilp1(const PlacementInstance& inst) { return build_model(inst, 1); }
IlpModel build_ilp2(const PlacementInstance& inst) { return build_model(inst, 2); }

std::string IlpModel::column_name(int col) const {
  if (col < num_real_nodes) return "x_n" + std::to_string(col);
  const YVar& v = y[static_cast<size_t>(col - num_real_nodes)];
  return "y_f" + std::to_string(v.flow) + "_p" + std::to_string(v.path_index) + "_n" +
         std::to_string(v.ta_node);
}

namespace {

// Depth-first branch and bound over per-flow (path, node) options, within an
// optional mask of allowed TA nodes. The caller may pass a cutoff from a
// previous search; only strictly better solutions are reported.
class BranchAndBound {
 public:
  BranchAndBound(const IlpModel& m, std::chrono::steady_clock::time_point deadline,
                 const std::vector<char>* allowed_nodes = nullptr)
      : m_(m), deadline_(deadline), allowed_(allowed_nodes) {}

  struct Outcome {
    bool found = false;       // a solution strictly better than the cutoff
    bool infeasible = false;  // proven infeasible within the mask
    bool timed_out = false;
    double objective = std::numeric_limits<double>::infinity();
    std::vector<FlowAssignment> assignment;  // by original flow id
  };

  Outcome run(double cutoff) {
    const int nf = static_cast<int>(m_.flow_y.size());
    Outcome out;
    if (nf == 0) {
      out.found = true;
      out.objective = 0.0;
      return out;
    }
    if (options_.empty()) prepare();

    link_rem_ = m_.link_capacity;
    node_rem_ = m_.node_capacity;
    open_.assign(m_.num_real_nodes, 0);
    open_count_ = 0;
    chosen_.assign(nf, -1);
    mu_stack_.clear();
    mu_cap_ = mu_limit();
    best_ = cutoff;
    have_best_ = std::isfinite(cutoff);
    found_ = false;
    timed_out_ = false;
    if (open_count_ == mu_cap_) push_mu_snapshot(0);

    dfs(0, 0.0);

    out.timed_out = timed_out_;
    out.found = found_;
    out.infeasible = !found_ && !timed_out_ && !have_best_;
    if (found_) {
      out.objective = best_;
      out.assignment.resize(nf);
      for (int i = 0; i < nf; ++i) {
        const Option& o = options_[i][static_cast<size_t>(best_choice_[i])];
        out.assignment[order_[i]] = FlowAssignment{o.path_index, o.ta_node};
      }
    }
    return out;
  }

 private:
  struct Option {
    double coef = 0.0;
    int node = -1;  // real node id, or -1 for the fictive node
    int path_index = -1;
    int ta_node = -1;  // as stored in the model (fictive keeps its id)
    const std::vector<int>* links = nullptr;
  };

  // Inside a mask the budget can never bind beyond the mask size.
  int mu_limit() const {
    if (!allowed_) return m_.mu;
    int k = 0;
    for (char c : *allowed_) k += c;
    return std::min(m_.mu, k);
  }

  void prepare() {
    const int nf = static_cast<int>(m_.flow_y.size());
    order_.resize(nf);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
      if (m_.flow_bandwidth[a] != m_.flow_bandwidth[b])
        return m_.flow_bandwidth[a] > m_.flow_bandwidth[b];
      return a < b;
    });

    options_.resize(nf);
    bw_.resize(nf);
    for (int i = 0; i < nf; ++i) {
      int f = order_[i];
      bw_[i] = m_.flow_bandwidth[f];
      // The no-TA option per path: any same-path real-node option that is
      // not strictly cheaper is dominated (same links, extra node and
      // budget use) and only feeds tie plateaus, so it never enters the
      // search. The model itself keeps every column.
      std::vector<double> fict_coef(m_.flow_path_links[f].size(),
                                    std::numeric_limits<double>::infinity());
      for (int yi : m_.flow_y[f]) {
        const auto& y = m_.y[static_cast<size_t>(yi)];
        if (y.ta_node >= m_.num_real_nodes) fict_coef[y.path_index] = y.coef;
      }
      for (int yi : m_.flow_y[f]) {
        const auto& y = m_.y[static_cast<size_t>(yi)];
        const bool real = y.ta_node < m_.num_real_nodes;
        if (real && allowed_ && !(*allowed_)[y.ta_node]) continue;
        if (real && y.coef >= fict_coef[y.path_index]) continue;
        Option o;
        o.coef = y.coef;
        o.path_index = y.path_index;
        o.ta_node = y.ta_node;
        o.node = real ? y.ta_node : -1;
        o.links = &m_.flow_path_links[f][y.path_index];
        options_[i].push_back(o);
      }
      // Ascending cost, cost-free first on ties; the model's (path,
      // position) order breaks the rest.
      std::stable_sort(options_[i].begin(), options_[i].end(),
                       [](const Option& a, const Option& b) {
                         if (a.coef != b.coef) return a.coef < b.coef;
                         return (a.node < 0) && (b.node >= 0);
                       });
    }

    // Root bound data: per position, the cheapest option, the cheapest
    // alternative on a different node, and suffix aggregates for the
    // capacity displacement term.
    suffix_min_.assign(nf + 1, 0.0);
    min_node_.assign(nf, -1);
    ratio_.assign(nf, 0.0);
    for (int i = nf - 1; i >= 0; --i) {
      const Option& first = options_[i].front();
      double alt = std::numeric_limits<double>::infinity();
      for (const Option& o : options_[i])
        if (o.node != first.node) {
          alt = o.coef;
          break;
        }
      min_node_[i] = first.node;
      // The fictive option always exists, so alt is finite whenever the
      // cheapest option sits on a real node.
      ratio_[i] = first.node >= 0 ? (alt - first.coef) / bw_[i] : 0.0;
      suffix_min_[i] = suffix_min_[i + 1] + first.coef;
    }
    demand_.assign(m_.num_real_nodes, std::vector<double>(nf + 1, 0.0));
    min_ratio_.assign(m_.num_real_nodes,
                      std::vector<double>(nf + 1, std::numeric_limits<double>::infinity()));
    for (int n = 0; n < m_.num_real_nodes; ++n)
      for (int i = nf - 1; i >= 0; --i) {
        demand_[n][i] = demand_[n][i + 1] + (min_node_[i] == n ? bw_[i] : 0.0);
        min_ratio_[n][i] = std::min(min_ratio_[n][i + 1],
                                    min_node_[i] == n ? ratio_[i]
                                                      : std::numeric_limits<double>::infinity());
      }
  }

  bool out_of_time() {
    if (timed_out_) return true;
    if ((++ticks_ & 0xFFF) == 0 && std::chrono::steady_clock::now() > deadline_)
      timed_out_ = true;
    return timed_out_;
  }

  // Admissible completion bound for positions >= i. Without capacity
  // interaction it is the sum of per-flow minima; on top of that, for every
  // node whose suffix demand exceeds the remaining capacity, the overflow
  // must move to each flow's next-best node, costing at least the smallest
  // per-Mbps upgrade in the group.
  double suffix_bound(int i) const {
    if (!mu_stack_.empty()) return mu_stack_.back().rsuffix[i];
    double extra = 0.0;
    for (int n = 0; n < m_.num_real_nodes; ++n) {
      double excess = demand_[n][i] - node_rem_[n];
      if (excess > 0.0 && std::isfinite(min_ratio_[n][i])) extra += excess * min_ratio_[n][i];
    }
    return suffix_min_[i] + extra;
  }

  // Once the TA budget is exhausted, deeper flows may only use already-open
  // nodes or the fictive one; per-flow minima are recomputed under that
  // restriction.
  void push_mu_snapshot(int from_depth) {
    const int nf = static_cast<int>(options_.size());
    MuSnapshot snap;
    snap.rsuffix.assign(nf + 1, 0.0);
    for (int i = nf - 1; i >= from_depth; --i) {
      double mn = std::numeric_limits<double>::infinity();
      for (const Option& o : options_[i])
        if (o.node < 0 || open_[o.node]) mn = std::min(mn, o.coef);
      snap.rsuffix[i] = snap.rsuffix[i + 1] + mn;  // fictive option keeps mn finite
    }
    mu_stack_.push_back(std::move(snap));
  }

  // Objective sums re-associate across branches, so equal-cost plateaus can
  // differ by a few ulps and defeat exact >= pruning; comparisons against the
  // incumbent leave this much relative slack. Reported optima are exact up to
  // this rounding slack, far below every tolerance asserted on them.
  static constexpr double kTieSlack = 1e-12;

  double cut() const { return best_ - kTieSlack * (1.0 + std::abs(best_)); }

  void dfs(int depth, double z) {
    if (out_of_time()) return;
    const int nf = static_cast<int>(options_.size());
    if (depth == nf) {
      if (!have_best_ || z < best_) {
        best_ = z;
        have_best_ = true;
        found_ = true;
        best_choice_ = chosen_;
      }
      return;
    }
    const double tail_plain = suffix_min_[depth + 1];
    for (size_t oi = 0; oi < options_[depth].size(); ++oi) {
      const Option& o = options_[depth][oi];
      if (have_best_ && z + o.coef + tail_plain >= cut())
        break;  // options are sorted by coef; nothing later can improve
      // Feasibility against current residuals and the TA budget.
      if (o.node >= 0) {
        if (!open_[o.node] && open_count_ >= mu_cap_) continue;
        if (node_rem_[o.node] < bw_[depth]) continue;
      }
      bool fits = true;
      for (int lid : *o.links)
        if (link_rem_[lid] < bw_[depth]) {
          fits = false;
          break;
        }
      if (!fits) continue;

      // Apply.
      for (int lid : *o.links) link_rem_[lid] -= bw_[depth];
      bool opened = false;
      if (o.node >= 0) {
        node_rem_[o.node] -= bw_[depth];
        if (!open_[o.node]) {
          open_[o.node] = 1;
          ++open_count_;
          opened = true;
          if (open_count_ == mu_cap_) push_mu_snapshot(depth + 1);
        }
      }
      chosen_[depth] = static_cast<int>(oi);

      if (!have_best_ || z + o.coef + suffix_bound(depth + 1) < cut())
        dfs(depth + 1, z + o.coef);

      // Undo.
      if (opened) {
        if (open_count_ == mu_cap_) mu_stack_.pop_back();
        open_[o.node] = 0;
        --open_count_;
      }
      if (o.node >= 0) node_rem_[o.node] += bw_[depth];
      for (int lid : *o.links) link_rem_[lid] += bw_[depth];
      if (timed_out_) return;
    }
    chosen_[depth] = -1;
  }

  struct MuSnapshot {
    std::vector<double> rsuffix;
  };

  const IlpModel& m_;
  std::chrono::steady_clock::time_point deadline_;
  const std::vector<char>* allowed_;
  std::uint64_t ticks_ = 0;
  bool timed_out_ = false;
  int mu_cap_ = 0;

  std::vector<int> order_;
  std::vector<double> bw_;
  std::vector<std::vector<Option>> options_;
  std::vector<double> suffix_min_;
  std::vector<int> min_node_;
  std::vector<double> ratio_;
  std::vector<std::vector<double>> demand_;
  std::vector<std::vector<double>> min_ratio_;

  std::vector<double> link_rem_, node_rem_;
  std::vector<char> open_;
  int open_count_ = 0;
  std::vector<int> chosen_;
  std::vector<MuSnapshot> mu_stack_;

  bool have_best_ = false;  // a cutoff or an incumbent exists
  bool found_ = false;      // an incumbent was produced by this search
  double best_ = std::numeric_limits<double>::infinity();
  std::vector<int> best_choice_;
};

// Number of k-subsets, saturating at `cap`.
std::uint64_t choose_capped(int n, int k, std::uint64_t cap) {
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) {
    c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    if (c > cap) return cap + 1;
  }
  return c;
}

}  // namespace

Solution solve_exact(const IlpModel& m, double time_limit_seconds) {
  const auto start = std::chrono::steady_clock::now();
  const auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                    std::chrono::duration<double>(time_limit_seconds));
  const int nf = static_cast<int>(m.flow_y.size());
  const int N = m.num_real_nodes;
  const int k = std::min(m.mu, N);

  Solution sol;
  sol.instance_id = m.instance_id;
  sol.assignment.assign(nf, std::nullopt);

  BranchAndBound::Outcome best;
  bool any_timeout = false;

  // With a binding budget over few nodes, branching on the open-TA set first
  // keeps the per-subset search tight: inside a fixed set the per-flow
  // minimum bound is exact whenever capacities are slack. Beyond the subset
  // cap the plain flow search takes over.
  constexpr std::uint64_t kMaxSubsets = 50000;
  const bool subset_mode = k < N && choose_capped(N, k, kMaxSubsets) <= kMaxSubsets;

  if (subset_mode) {
    // Per-flow minima by node for the subset pre-filter.
    std::vector<double> min_star(nf, std::numeric_limits<double>::infinity());
    std::vector<std::vector<double>> min_via(
        nf, std::vector<double>(N, std::numeric_limits<double>::infinity()));
    for (const auto& y : m.y) {
      if (y.ta_node < N)
        min_via[y.flow][y.ta_node] = std::min(min_via[y.flow][y.ta_node], y.coef);
      else
        min_star[y.flow] = std::min(min_star[y.flow], y.coef);
    }

    std::vector<int> subset(k);
    for (int i = 0; i < k; ++i) subset[i] = i;
    bool exhausted = false;
    while (!exhausted) {
      if (std::chrono::steady_clock::now() > deadline) {
        any_timeout = true;
        break;
      }
      bool skip = false;
      if (best.found) {
        const double cutoff =
            best.objective - 1e-12 * (1.0 + std::abs(best.objective));
        double lb = 0.0;
        for (int f = 0; f < nf; ++f) {
          double mn = min_star[f];
          for (int n : subset) mn = std::min(mn, min_via[f][n]);
          lb += mn;
          if (lb >= cutoff) {
            skip = true;
            break;
          }
        }
      }
      if (!skip) {
        std::vector<char> mask(N, 0);
        for (int n : subset) mask[n] = 1;
        BranchAndBound bb(m, deadline, &mask);
        auto out = bb.run(best.found ? best.objective : std::numeric_limits<double>::infinity());
        any_timeout = any_timeout || out.timed_out;
        if (out.found) best = out;  // a cutoff run only reports strict improvements
      }
      // Next lexicographic k-subset of {0..N-1}.
      if (k == 0) break;
      int i = k - 1;
      while (i >= 0 && subset[i] == N - k + i) --i;
      if (i < 0) {
        exhausted = true;
      } else {
        ++subset[i];
        for (int j = i + 1; j < k; ++j) subset[j] = subset[j - 1] + 1;
      }
    }
  } else {
    BranchAndBound bb(m, deadline);
    auto out = bb.run(std::numeric_limits<double>::infinity());
    any_timeout = out.timed_out;
    best = out;
  }

  sol.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!best.found) {
    sol.status = any_timeout ? SolveStatus::TimedOut : SolveStatus::Infeasible;
    return sol;
  }
  sol.status = any_timeout ? SolveStatus::TimedOut : SolveStatus::Optimal;
  sol.objective = best.objective;
  std::vector<char> used(N, 0);
  for (int f = 0; f < nf; ++f) {
    sol.assignment[f] = best.assignment[f];
    if (best.assignment[f].ta_node < N) used[best.assignment[f].ta_node] = 1;
  }
  for (int n = 0; n < N; ++n)
    if (used[n]) sol.open_tas.push_back(n);
  return sol;
}

namespace {

void emit_terms(std::ostream& os, const std::vector<std::pair<int, double>>& terms,
                const IlpModel& m, size_t& line_len, bool skip_zero) {
  bool first = true;
  for (const auto& [col, coef] : terms) {
    if (skip_zero && coef == 0.0) continue;
    std::string tok;
    double c = coef;
    if (first) {
      if (c < 0) {
        tok = "- ";
        c = -c;
      }
    } else {
      tok = c < 0 ? "- " : "+ ";
      if (c < 0) c = -c;
    }
    if (c != 1.0) tok += fmt_double(c) + " ";
    tok += m.column_name(col);
    if (line_len + tok.size() + 1 > 250) {
      os << "\n ";
      line_len = 1;
    }
    os << ' ' << tok;
    line_len += tok.size() + 1;
    first = false;
  }
  if (first) {
    // All-zero objective: anchor it on the first column so the file stays
    // well-formed.
    os << " 0 " << m.column_name(terms.empty() ? 0 : terms.front().first);
  }
}

}  // namespace

std::string export_lp_string(const IlpModel& m) {
  std::ostringstream os;
  os << "\\ tars ILP" << m.objective_kind << " flows=" << m.flow_y.size()
     << " nodes=" << m.num_real_nodes << " links=" << m.num_links << " mu=" << m.mu << "\n";
  os << "Minimize\n obj:";
  std::vector<std::pair<int, double>> obj;
  for (size_t yi = 0; yi < m.y.size(); ++yi)
    obj.emplace_back(m.num_real_nodes + static_cast<int>(yi), m.y[yi].coef);
  size_t len = 5;
  emit_terms(os, obj, m, len, /*skip_zero=*/true);
  os << "\nSubject To\n";
  for (const auto& row : m.rows) {
    os << ' ' << row.name << ':';
    size_t rlen = row.name.size() + 2;
    emit_terms(os, row.terms, m, rlen, /*skip_zero=*/false);
    os << (row.sense == 'E' ? " = " : " <= ") << fmt_double(row.rhs) << "\n";
  }
  os << "Binary\n";
  for (int c = 0; c < m.column_count(); ++c) os << ' ' << m.column_name(c) << "\n";
  os << "End\n";
  return os.str();
}

void export_lp(const IlpModel& m, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write LP file: " + path);
  f << export_lp_string(m);
  if (!f) throw std::runtime_error("write failure: " + path);
}

Metrics evaluate(const PlacementInstance& inst, const Solution& sol) {
  return evaluate(inst, sol, EvaluateOptions{});
}

Metrics evaluate(const PlacementInstance& inst, const Solution& sol,
                 const EvaluateOptions& opts) {
  Metrics m;
  const int nf = inst.flow_count();
  const int fictive = inst.graph.fictive_id();
  m.flow_epdd_ms.assign(nf, std::numeric_limits<double>::quiet_NaN());
  m.flow_deploy_cost.assign(nf, 0.0);
  m.flow_penalty_cost.assign(nf, 0.0);

  if (static_cast<int>(sol.assignment.size()) != nf) {
    m.violations.push_back("solution covers " + std::to_string(sol.assignment.size()) +
                           " flows, instance has " + std::to_string(nf));
    return m;
  }

  Metrics base = no_ta_baseline(inst);

  std::vector<double> link_used(inst.graph.link_count(), 0.0);
  std::vector<double> node_used(inst.graph.node_count(), 0.0);
  std::vector<char> used(inst.graph.node_count(), 0);
  double sum = 0.0;
  int assigned = 0;
  for (int f = 0; f < nf; ++f) {
    const auto& a = sol.assignment[f];
    if (!a) {
      ++m.rejected;
      if (opts.rejection_penalty_cap_ms > 0)
        m.penalty_cost += inst.flows[f].penalty_per_ms * opts.rejection_penalty_cap_ms;
      continue;
    }
    if (a->path_index < 0 || a->path_index >= static_cast<int>(inst.paths[f].size())) {
      m.violations.push_back("flow " + std::to_string(f) + ": path index out of range");
      continue;
    }
    const PathCandidate& p = inst.paths[f][a->path_index];
    if (a->ta_node != fictive && p.position_of(a->ta_node) < 0) {
      m.violations.push_back("flow " + std::to_string(f) + ": TA node " +
                             std::to_string(a->ta_node) + " is not on its path");
      continue;
    }
    const double d = inst.delta_of(f, a->path_index, a->ta_node);
    m.flow_epdd_ms[f] = d;
    sum += d;
    ++assigned;
    for (int lid : p.link_seq) link_used[lid] += inst.flows[f].bandwidth_mbps;
    if (a->ta_node != fictive) {
      node_used[a->ta_node] += inst.flows[f].bandwidth_mbps;
      used[a->ta_node] = 1;
      m.flow_deploy_cost[f] =
          *inst.graph.node(a->ta_node).unit_cost * inst.flows[f].bandwidth_mbps;
      m.deploy_cost += m.flow_deploy_cost[f];
    }
    m.flow_penalty_cost[f] =
        inst.flows[f].penalty_per_ms * std::max(0.0, d - inst.flows[f].sla_ms);
    m.penalty_cost += m.flow_penalty_cost[f];
  }
  m.avg_epdd_ms = assigned > 0 ? sum / assigned : 0.0;
  m.total_cost = m.deploy_cost + m.penalty_cost;
  if (base.avg_epdd_ms > 0 && assigned > 0)
    m.improvement_pct = (base.avg_epdd_ms - m.avg_epdd_ms) / base.avg_epdd_ms * 100.0;

  for (int f = 0; f < nf; ++f) {
    if (std::isnan(m.flow_epdd_ms[f]) || std::isnan(base.flow_epdd_ms[f])) continue;
    m.per_flow_improvement_pct.push_back(
        (base.flow_epdd_ms[f] - m.flow_epdd_ms[f]) / base.flow_epdd_ms[f] * 100.0);
  }

  const double tol = 1e-9;
  for (const auto& l : inst.graph.links())
    if (link_used[l.id] > l.bandwidth_mbps * (1 + tol) + tol)
      m.violations.push_back("link " + std::to_string(l.u) + "-" + std::to_string(l.v) +
                             " over capacity: " + fmt_double(link_used[l.id]) + " > " +
                             fmt_double(l.bandwidth_mbps));
  for (const auto& n : inst.graph.nodes())
    if (n.capacity_mbps && node_used[n.id] > *n.capacity_mbps * (1 + tol) + tol)
      m.violations.push_back("node " + std::to_string(n.id) + " over capacity: " +
                             fmt_double(node_used[n.id]) + " > " + fmt_double(*n.capacity_mbps));
  int open = 0;
  for (int n = 0; n < inst.graph.node_count(); ++n)
    if (used[n]) ++open;
  if (open > inst.mu)
    m.violations.push_back("TA budget exceeded: " + std::to_string(open) + " > mu=" +
                           std::to_string(inst.mu));
  if (!sol.open_tas.empty() || open > 0) {
    std::vector<int> expect;
    for (int n = 0; n < inst.graph.node_count(); ++n)
      if (used[n]) expect.push_back(n);
    if (expect != sol.open_tas)
      m.violations.push_back("open_tas does not match the nodes actually serving flows");
  }
  return m;
}

void save_solution(const Solution& sol, const PlacementInstance& inst, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write solution file: " + path);
  char idbuf[20];
  std::snprintf(idbuf, sizeof(idbuf), "%016llx",
                static_cast<unsigned long long>(sol.instance_id));
  f << "tars-solution 1\n";
  f << "instance " << idbuf << "\n";
  f << "status " << to_string(sol.status) << "\n";
  f << "objective " << fmt_double(sol.objective) << "\n";
  f << "wall_seconds " << fmt_double(sol.wall_seconds) << "\n";
  f << "open_tas";
  for (int n : sol.open_tas) f << ' ' << n;
  f << "\n";
  for (size_t fi = 0; fi < sol.assignment.size(); ++fi) {
    f << "flow " << fi;
    if (!sol.assignment[fi]) {
      f << " rejected\n";
      continue;
    }
    const auto& a = *sol.assignment[fi];
    f << " path";
    for (int n : inst.paths[fi][a.path_index].node_seq) f << ' ' << n;
    f << " ta ";
    if (a.ta_node == inst.graph.fictive_id())
      f << '*';
    else
      f << a.ta_node;
    f << "\n";
  }
  f << "end\n";
}

void write_metrics_csv(const Metrics& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write metrics csv: " + path);
  f << "metric,value\n";
  f << "avg_epdd_ms," << fmt_double(m.avg_epdd_ms) << "\n";
  f << "improvement_pct," << fmt_double(m.improvement_pct) << "\n";
  f << "deploy_cost_per_s," << fmt_double(m.deploy_cost) << "\n";
  f << "penalty_cost_per_s," << fmt_double(m.penalty_cost) << "\n";
  f << "total_cost_per_s," << fmt_double(m.total_cost) << "\n";
  f << "rejected," << m.rejected << "\n";
  f << "violations," << m.violations.size() << "\n";
}

}  // namespace tars
