#include "tars/paths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>

namespace tars {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative tolerance for "same total delay" when walking the shortest-path
// DAG; absorbs association-order rounding of otherwise equal sums.
constexpr double kTieRel = 1e-12;

bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Total order used everywhere paths are ranked.
bool path_less(double delay_a, const std::vector<int>& seq_a, double delay_b,
               const std::vector<int>& seq_b) {
  if (delay_a != delay_b) return delay_a < delay_b;
  return lex_less(seq_a, seq_b);
}

struct Banned {
  std::vector<char> nodes;  // size node_count
  std::vector<char> links;  // size link_count
};

// Min-delay distances from `target` to every node over the allowed subgraph.
std::vector<double> dijkstra_dist(const NetworkGraph& g, int target, const Banned& ban) {
  std::vector<double> dist(g.node_count(), kInf);
  if (ban.nodes[target]) return dist;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[target] = 0.0;
  pq.emplace(0.0, target);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (const auto& [v, lid] : g.adjacency(u)) {
      if (ban.nodes[v] || ban.links[lid]) continue;
      double nd = d + g.link(lid).delay_ms;
      if (nd < dist[v]) {
        dist[v] = nd;
        pq.emplace(nd, v);
      }
    }
  }
  return dist;
}

// Lexicographically smallest minimum-delay s->d node sequence in the allowed
// subgraph, or nullopt if unreachable. Greedy front-first walk over the
// shortest-path DAG: picking the smallest viable next hop at each step gives
// the lexicographically minimal sequence.
std::optional<std::vector<int>> min_delay_lex_path(const NetworkGraph& g, int s, int d,
                                                   const Banned& ban) {
  if (ban.nodes[s] || ban.nodes[d]) return std::nullopt;
  std::vector<double> rdist = dijkstra_dist(g, d, ban);
  if (!std::isfinite(rdist[s])) return std::nullopt;
  const double total = rdist[s];
  const double tol = kTieRel * std::max(1.0, total);

  std::vector<int> seq{s};
  double acc = 0.0;
  int u = s;
  while (u != d) {
    int best = -1, best_link = -1;
    for (const auto& [v, lid] : g.adjacency(u)) {  // neighbors sorted by id
      if (ban.nodes[v] || ban.links[lid]) continue;
      if (std::abs(acc + g.link(lid).delay_ms + rdist[v] - total) <= tol) {
        best = v;
        best_link = lid;
        break;
      }
    }
    if (best < 0) return std::nullopt;  // numeric dead end; cannot happen on valid data
    acc += g.link(best_link).delay_ms;
    seq.push_back(best);
    u = best;
  }
  return seq;
}

struct CandidateLess {
  bool operator()(const std::pair<double, std::vector<int>>& a,
                  const std::pair<double, std::vector<int>>& b) const {
    return path_less(a.first, a.second, b.first, b.second);
  }
};

double seq_delay(const NetworkGraph& g, const std::vector<int>& seq) {
  double d = 0.0;
  for (size_t i = 0; i + 1 < seq.size(); ++i) d += g.find_link(seq[i], seq[i + 1])->delay_ms;
  return d;
}

}  // namespace

int PathCandidate::position_of(int node) const {
  for (size_t i = 0; i < node_seq.size(); ++i)
    if (node_seq[i] == node) return static_cast<int>(i);
  return -1;
}

PathCandidate build_path(const NetworkGraph& g, const std::vector<int>& node_seq) {
  if (node_seq.size() < 2) throw std::invalid_argument("a path needs at least two nodes");
  PathCandidate p;
  p.node_seq = node_seq;
  p.prefix_delay_ms.assign(node_seq.size(), 0.0);
  p.prefix_survive.assign(node_seq.size(), 1.0);
  p.node_member.assign(g.node_count() + 1, 0);
  p.link_used.assign(g.link_count(), 0);
  p.node_member[g.node_count()] = 1;  // the fictive node is on every path

  std::vector<char> seen(g.node_count(), 0);
  for (size_t i = 0; i < node_seq.size(); ++i) {
    int n = node_seq[i];
    if (n < 0 || n >= g.node_count())
      throw std::invalid_argument("path node " + std::to_string(n) + " out of range");
    if (seen[n])
      throw std::invalid_argument("path repeats node " + std::to_string(n));
    seen[n] = 1;
    p.node_member[n] = 1;
    if (i == 0) continue;
    const LinkSpec* l = g.find_link(node_seq[i - 1], n);
    if (!l)
      throw std::invalid_argument("no link " + std::to_string(node_seq[i - 1]) + "-" +
                                  std::to_string(n));
    p.link_seq.push_back(l->id);
    p.link_used[l->id] = 1;
    p.prefix_delay_ms[i] = p.prefix_delay_ms[i - 1] + l->delay_ms;
    p.prefix_survive[i] = p.prefix_survive[i - 1] * (1.0 - l->loss.value_or(0.0));
  }
  p.total_delay_ms = p.prefix_delay_ms.back();
  p.total_loss = 1.0 - p.prefix_survive.back();
  return p;
}

PathCandidate shortest_path(const NetworkGraph& g, int s, int d) {
  if (s == d) throw std::invalid_argument("source equals destination (" + std::to_string(s) + ")");
  if (s < 0 || s >= g.node_count() || d < 0 || d >= g.node_count())
    throw std::invalid_argument("endpoint out of range");
  Banned ban{std::vector<char>(g.node_count(), 0), std::vector<char>(g.link_count(), 0)};
  auto seq = min_delay_lex_path(g, s, d, ban);
  if (!seq)
    throw std::runtime_error("no path from " + std::to_string(s) + " to " + std::to_string(d));
  return build_path(g, *seq);
}

std::vector<PathCandidate> k_shortest_paths(const NetworkGraph& g, int s, int d, int k,
                                            int max_hops) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (s == d) throw std::invalid_argument("source equals destination (" + std::to_string(s) + ")");
  if (s < 0 || s >= g.node_count() || d < 0 || d >= g.node_count())
    throw std::invalid_argument("endpoint out of range");

  // Yen's algorithm. `found` holds every produced path (deviation roots);
  // `accepted` only those within the hop cap.
  std::vector<std::vector<int>> found;
  std::vector<PathCandidate> accepted;
  std::set<std::pair<double, std::vector<int>>, CandidateLess> candidates;

  Banned none{std::vector<char>(g.node_count(), 0), std::vector<char>(g.link_count(), 0)};
  auto first = min_delay_lex_path(g, s, d, none);
  if (!first)
    throw std::runtime_error("no path from " + std::to_string(s) + " to " + std::to_string(d));
  found.push_back(*first);

  auto accept = [&](const std::vector<int>& seq) {
    if (max_hops <= 0 || static_cast<int>(seq.size()) - 1 <= max_hops)
      accepted.push_back(build_path(g, seq));
  };
  accept(*first);

  while (static_cast<int>(accepted.size()) < k) {
    const std::vector<int>& prev = found.back();
    for (size_t j = 0; j + 1 < prev.size(); ++j) {
      Banned ban{std::vector<char>(g.node_count(), 0), std::vector<char>(g.link_count(), 0)};
      // Root = prev[0..j]; ban the next link of every known path sharing it.
      for (const auto& p : found) {
        if (p.size() <= j + 1) continue;
        if (!std::equal(prev.begin(), prev.begin() + j + 1, p.begin())) continue;
        ban.links[g.find_link(p[j], p[j + 1])->id] = 1;
      }
      for (size_t i = 0; i < j; ++i) ban.nodes[prev[i]] = 1;

      auto spur = min_delay_lex_path(g, prev[j], d, ban);
      if (!spur) continue;
      std::vector<int> total(prev.begin(), prev.begin() + j);
      total.insert(total.end(), spur->begin(), spur->end());
      if (std::find(found.begin(), found.end(), total) != found.end()) continue;
      candidates.emplace(seq_delay(g, total), std::move(total));
    }
    if (candidates.empty()) break;
    auto it = candidates.begin();
    found.push_back(it->second);
    accept(it->second);
    candidates.erase(it);
  }

  std::sort(accepted.begin(), accepted.end(), [](const PathCandidate& a, const PathCandidate& b) {
    return path_less(a.total_delay_ms, a.node_seq, b.total_delay_ms, b.node_seq);
  });
  if (static_cast<int>(accepted.size()) > k) accepted.resize(k);
  return accepted;
}

SegmentStats segment_stats(const PathCandidate& p, int split) {
  SegmentStats s;
  if (split == p.fictive_id()) {
    s.d1_ms = p.total_delay_ms;
    s.q1 = p.total_loss;
    s.d2_ms = 0.0;
    s.q2 = 0.0;
    return s;
  }
  int pos = p.position_of(split);
  if (pos < 0)
    throw std::invalid_argument("split node " + std::to_string(split) + " is not on the path");
  s.d1_ms = p.prefix_delay_ms[pos];
  s.q1 = 1.0 - p.prefix_survive[pos];
  s.d2_ms = p.total_delay_ms - s.d1_ms;
  s.q2 = 1.0 - p.prefix_survive.back() / p.prefix_survive[pos];
  return s;
}

}  // namespace tars
