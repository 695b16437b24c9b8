#pragma once

#include <vector>

#include "tars/net.hpp"

namespace tars {

// A candidate route with precomputed aggregates. `node_member` has one flag
// per network node plus one trailing entry for the fictive node, which
// belongs to every path; `link_used` has one flag per link.
struct PathCandidate {
  std::vector<int> node_seq;  // source first, destination last; simple
  std::vector<int> link_seq;
  double total_delay_ms = 0.0;
  double total_loss = 0.0;
  std::vector<double> prefix_delay_ms;  // per node position, cumulative
  std::vector<double> prefix_survive;   // per node position, cumulative product of (1 - loss)
  std::vector<char> node_member;        // beta flags, size node_count + 1
  std::vector<char> link_used;          // phi flags, size link_count

  int hops() const { return static_cast<int>(link_seq.size()); }
  int fictive_id() const { return static_cast<int>(node_member.size()) - 1; }
  // Position of `node` in node_seq, or -1.
  int position_of(int node) const;
  bool contains(int node) const { return node == fictive_id() || position_of(node) >= 0; }

  bool operator==(const PathCandidate&) const = default;
};

struct SegmentStats {
  double d1_ms = 0.0;  // source -> TA delay
  double q1 = 0.0;     // source -> TA loss
  double d2_ms = 0.0;  // TA -> destination delay
  double q2 = 0.0;
};

// Builds a candidate from an explicit node sequence, checking that every
// hop is an existing link. Unset link losses count as 0.
PathCandidate build_path(const NetworkGraph& g, const std::vector<int>& node_seq);

// Minimum-delay path under link delays. Ties are broken by lexicographically
// smaller node sequence so runs are reproducible.
PathCandidate shortest_path(const NetworkGraph& g, int s, int d);

// Up to k loopless paths ordered by (total_delay, node_seq). The first entry
// equals shortest_path. max_hops = 0 means no hop cap; otherwise paths with
// more links are filtered out of the result.
std::vector<PathCandidate> k_shortest_paths(const NetworkGraph& g, int s, int d, int k,
                                            int max_hops = 0);

// Splits the path at `split` (a node on the path, or the fictive id, which
// yields the whole path as segment one). d1+d2 equals total delay and
// (1-q1)(1-q2) equals 1-total_loss to 1e-12 relative.
SegmentStats segment_stats(const PathCandidate& p, int split);

}  // namespace tars
