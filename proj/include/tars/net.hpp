#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tars {

// Thrown by the topology/instance loaders; carries a 1-based line number
// when the error is tied to a specific input line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct NodeSpec {
  int id = -1;
  std::string name;
  std::optional<std::pair<double, double>> coords;  // latitude, longitude (deg)
  std::optional<double> capacity_mbps;              // C_n, filled by the generator when absent
  std::optional<double> unit_cost;                  // alpha_n, $/Mbps

  bool operator==(const NodeSpec&) const = default;
};

struct LinkSpec {
  int id = -1;
  int u = -1, v = -1;  // normalized so u < v; links are undirected
  double bandwidth_mbps = 0.0;
  double delay_ms = 0.0;
  std::optional<double> loss;  // per-traversal loss probability, in [0,1)

  bool operator==(const LinkSpec&) const = default;
};

// Physical network. Real nodes have dense ids 0..N-1. Id N is reserved for
// the fictive "no TA" node: it sits on every path, has unbounded capacity
// and zero cost, and never appears in a link.
class NetworkGraph {
 public:
  int add_node(NodeSpec n);
  int add_link(int u, int v, double bandwidth_mbps, double delay_ms,
               std::optional<double> loss = std::nullopt);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int link_count() const { return static_cast<int>(links_.size()); }
  int fictive_id() const { return node_count(); }
  bool is_fictive(int n) const { return n == fictive_id(); }

  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  std::vector<NodeSpec>& nodes() { return nodes_; }
  const std::vector<LinkSpec>& links() const { return links_; }
  std::vector<LinkSpec>& links() { return links_; }

  const NodeSpec& node(int id) const { return nodes_.at(id); }
  const LinkSpec& link(int id) const { return links_.at(id); }

  // (neighbor, link id) pairs sorted by neighbor id.
  const std::vector<std::pair<int, int>>& adjacency(int n) const { return adj_.at(n); }

  const LinkSpec* find_link(int u, int v) const;

  bool operator==(const NetworkGraph& o) const {
    return nodes_ == o.nodes_ && links_ == o.links_;
  }

 private:
  std::vector<NodeSpec> nodes_;
  std::vector<LinkSpec> links_;
  std::vector<std::vector<std::pair<int, int>>> adj_;
};

// Great-circle distance; used to derive link delays from SNDlib coordinates.
double haversine_km(double lat1, double lon1, double lat2, double lon2);

// Delay model for coordinate-only topologies: distance / 200 km per ms
// (light in fiber), floored at this minimum.
inline constexpr double kMinDerivedDelayMs = 0.1;

// SNDlib native format. Only the NODES and LINKS sections are consumed.
// Link delay is derived from node coordinates; loss is left unset.
NetworkGraph load_sndlib(const std::string& text);

// Plain-text topology format, one record per line, '#' starts a comment:
//   node <id> <name> [<lat> <lon>] [capacity=<Mbps>] [cost=<$/Mbps>]
//   link <u> <v> <bandwidth Mbps> <delay ms> [<loss prob>]
NetworkGraph load_plain(const std::string& text);

std::string serialize_plain(const NetworkGraph& g);

// Reads a topology file, auto-detecting the format unless `format` is
// "plain" or "sndlib".
NetworkGraph load_topology_file(const std::string& path, const std::string& format = "auto");

// Empty result iff all invariants hold and the graph is connected (the
// fictive node is ignored). Violations are returned, never thrown.
std::vector<std::string> validate(const NetworkGraph& g);

}  // namespace tars
