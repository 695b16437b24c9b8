#include "tars/net.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <queue>
#include <sstream>

namespace tars {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

double parse_double(const std::string& tok, int line_no, const char* what) {
  try {
    size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("expected a number for ") + what + ", got '" + tok + "'",
                     line_no);
  }
}

int parse_int(const std::string& tok, int line_no, const char* what) {
  try {
    size_t used = 0;
    int v = std::stoi(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("expected an integer for ") + what + ", got '" + tok + "'",
                     line_no);
  }
}

}  // namespace

int NetworkGraph::add_node(NodeSpec n) {
  n.id = static_cast<int>(nodes_.size());
  nodes_.push_back(std::move(n));
  adj_.emplace_back();
  return nodes_.back().id;
}

int NetworkGraph::add_link(int u, int v, double bandwidth_mbps, double delay_ms,
                           std::optional<double> loss) {
  if (u < 0 || u >= node_count() || v < 0 || v >= node_count())
    throw std::out_of_range("link endpoint out of range");
  if (u == v) throw std::invalid_argument("self-loop link " + std::to_string(u));
  if (u > v) std::swap(u, v);
  if (find_link(u, v))
    throw std::invalid_argument("duplicate link " + std::to_string(u) + "-" + std::to_string(v));
  LinkSpec l;
  l.id = static_cast<int>(links_.size());
  l.u = u;
  l.v = v;
  l.bandwidth_mbps = bandwidth_mbps;
  l.delay_ms = delay_ms;
  l.loss = loss;
  links_.push_back(l);
  adj_[u].emplace_back(v, l.id);
  adj_[v].emplace_back(u, l.id);
  std::sort(adj_[u].begin(), adj_[u].end());
  std::sort(adj_[v].begin(), adj_[v].end());
  return l.id;
}

const LinkSpec* NetworkGraph::find_link(int u, int v) const {
  if (u > v) std::swap(u, v);
  for (const auto& [nbr, lid] : adj_.at(u))
    if (nbr == v) return &links_[lid];
  return nullptr;
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kEarthRadiusKm = 6371.0;
  constexpr double deg = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * deg;
  const double dlon = (lon2 - lon1) * deg;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * deg) * std::cos(lat2 * deg) * std::sin(dlon / 2) *
                       std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

NetworkGraph load_plain(const std::string& text) {
  NetworkGraph g;
  // Node lines may appear in any order; ids must end up dense 0..N-1.
  std::map<int, NodeSpec> pending;
  struct RawLink {
    int u, v, line_no;
    double bw, delay;
    std::optional<double> loss;
  };
  std::vector<RawLink> raw_links;

  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto toks = split_ws(strip_comment(line));
    if (toks.empty()) continue;
    if (toks[0] == "node") {
      if (toks.size() < 3) throw ParseError("node line needs at least an id and a name", line_no);
      NodeSpec n;
      int id = parse_int(toks[1], line_no, "node id");
      n.name = toks[2];
      size_t i = 3;
      // Two bare numbers right after the name are coordinates.
      if (i + 1 < toks.size() && toks[i].find('=') == std::string::npos &&
          toks[i + 1].find('=') == std::string::npos) {
        double lat = parse_double(toks[i], line_no, "latitude");
        double lon = parse_double(toks[i + 1], line_no, "longitude");
        n.coords = {lat, lon};
        i += 2;
      }
      for (; i < toks.size(); ++i) {
        auto eq = toks[i].find('=');
        if (eq == std::string::npos)
          throw ParseError("unexpected token '" + toks[i] + "' on node line", line_no);
        std::string key = toks[i].substr(0, eq);
        double val = parse_double(toks[i].substr(eq + 1), line_no, key.c_str());
        if (key == "capacity")
          n.capacity_mbps = val;
        else if (key == "cost")
          n.unit_cost = val;
        else
          throw ParseError("unknown node attribute '" + key + "'", line_no);
      }
      if (pending.count(id)) throw ParseError("duplicate node id " + std::to_string(id), line_no);
      pending[id] = std::move(n);
    } else if (toks[0] == "link") {
      if (toks.size() < 5 || toks.size() > 6)
        throw ParseError("link line needs: u v bandwidth delay [loss]", line_no);
      RawLink l;
      l.u = parse_int(toks[1], line_no, "link endpoint");
      l.v = parse_int(toks[2], line_no, "link endpoint");
      l.bw = parse_double(toks[3], line_no, "bandwidth");
      l.delay = parse_double(toks[4], line_no, "delay");
      l.line_no = line_no;
      if (toks.size() == 6) l.loss = parse_double(toks[5], line_no, "loss");
      raw_links.push_back(l);
    } else {
      throw ParseError("unknown record '" + toks[0] + "'", line_no);
    }
  }

  int expected = 0;
  for (auto& [id, n] : pending) {
    if (id != expected)
      throw ParseError("node ids must be dense 0..N-1; missing id " + std::to_string(expected));
    ++expected;
    g.add_node(std::move(n));
  }
  for (const auto& l : raw_links) {
    std::string lname = "link " + std::to_string(l.u) + "-" + std::to_string(l.v);
    if (l.u < 0 || l.u >= g.node_count() || l.v < 0 || l.v >= g.node_count())
      throw ParseError(lname + ": endpoint does not exist", l.line_no);
    if (l.u == l.v) throw ParseError(lname + ": self-loop", l.line_no);
    if (l.delay <= 0) throw ParseError(lname + ": delay must be > 0", l.line_no);
    if (l.bw <= 0) throw ParseError(lname + ": bandwidth must be > 0", l.line_no);
    if (l.loss && (*l.loss < 0 || *l.loss >= 1))
      throw ParseError(lname + ": loss must be < 1 and >= 0", l.line_no);
    try {
      g.add_link(l.u, l.v, l.bw, l.delay, l.loss);
    } catch (const std::invalid_argument& e) {
      throw ParseError(lname + ": " + e.what(), l.line_no);
    }
  }
  return g;
}

std::string serialize_plain(const NetworkGraph& g) {
  std::ostringstream os;
  for (const auto& n : g.nodes()) {
    os << "node " << n.id << ' ' << n.name;
    if (n.coords) os << ' ' << fmt_double(n.coords->first) << ' ' << fmt_double(n.coords->second);
    if (n.capacity_mbps) os << " capacity=" << fmt_double(*n.capacity_mbps);
    if (n.unit_cost) os << " cost=" << fmt_double(*n.unit_cost);
    os << '\n';
  }
  for (const auto& l : g.links()) {
    os << "link " << l.u << ' ' << l.v << ' ' << fmt_double(l.bandwidth_mbps) << ' '
       << fmt_double(l.delay_ms);
    if (l.loss) os << ' ' << fmt_double(*l.loss);
    os << '\n';
  }
  return os.str();
}

namespace {

// Tokenizes an SNDlib entry line, treating parentheses as separate tokens.
std::vector<std::string> sndlib_tokens(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == '(' || c == ')') {
      if (!cur.empty()) out.push_back(cur), cur.clear();
      out.push_back(std::string(1, c));
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(cur), cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

NetworkGraph load_sndlib(const std::string& text) {
  NetworkGraph g;
  std::map<std::string, int> node_ids;

  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  std::string section;
  while (std::getline(is, line)) {
    ++line_no;
    std::string body = strip_comment(line);
    // Strip the "?SNDlib ..." header.
    if (!body.empty() && body[0] == '?') continue;
    auto toks = sndlib_tokens(body);
    if (toks.empty()) continue;

    if (section.empty()) {
      if (toks.size() >= 2 && toks[1] == "(") {
        section = toks[0];
        continue;
      }
      throw ParseError("expected a section header, got '" + toks[0] + "'", line_no);
    }
    if (toks[0] == ")") {
      section.clear();
      continue;
    }
    if (section == "NODES") {
      // name ( longitude latitude )
      if (toks.size() < 5 || toks[1] != "(" || toks[4] != ")")
        throw ParseError("malformed NODES entry", line_no);
      if (node_ids.count(toks[0])) throw ParseError("duplicate node '" + toks[0] + "'", line_no);
      NodeSpec n;
      n.name = toks[0];
      double lon = parse_double(toks[2], line_no, "longitude");
      double lat = parse_double(toks[3], line_no, "latitude");
      n.coords = {lat, lon};
      node_ids[toks[0]] = g.add_node(std::move(n));
    } else if (section == "LINKS") {
      // id ( src dst ) preCap preCapCost routingCost setupCost ( modCap modCost ... )
      if (toks.size() < 5 || toks[1] != "(" || toks[4] != ")")
        throw ParseError("malformed LINKS entry", line_no);
      auto src = node_ids.find(toks[2]);
      auto dst = node_ids.find(toks[3]);
      if (src == node_ids.end() || dst == node_ids.end())
        throw ParseError("link references unknown node '" +
                             (src == node_ids.end() ? toks[2] : toks[3]) + "'",
                         line_no);
      double pre_cap = 0.0;
      if (toks.size() > 5 && toks[5] != "(")
        pre_cap = parse_double(toks[5], line_no, "pre-installed capacity");
      // Module list: ( cap cost cap cost ... )
      double best_module = 0.0;
      for (size_t i = 5; i + 1 < toks.size(); ++i) {
        if (toks[i] != "(") continue;
        for (size_t j = i + 1; j + 1 < toks.size() && toks[j] != ")"; j += 2)
          best_module = std::max(best_module, parse_double(toks[j], line_no, "module capacity"));
        break;
      }
      double bandwidth = pre_cap > 0 ? pre_cap : best_module;
      if (bandwidth <= 0)
        throw ParseError("link '" + toks[0] + "' has no positive capacity", line_no);

      const NodeSpec& a = g.node(src->second);
      const NodeSpec& b = g.node(dst->second);
      if (!a.coords || !b.coords)
        throw ParseError("cannot derive delay: node without coordinates", line_no);
      double km = haversine_km(a.coords->first, a.coords->second, b.coords->first,
                               b.coords->second);
      double delay = std::max(kMinDerivedDelayMs, km / 200.0);
      try {
        g.add_link(src->second, dst->second, bandwidth, delay, std::nullopt);
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), line_no);
      }
    }
    // Other sections (DEMANDS, ADMISSIBLE_PATHS, ...) are skipped.
  }
  if (!section.empty())
    throw ParseError("unterminated section '" + section + "'", line_no);
  return g;
}

NetworkGraph load_topology_file(const std::string& path, const std::string& format) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open topology file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  std::string text = ss.str();
  std::string fmt = format;
  if (fmt == "auto") {
    fmt = (text.rfind("?SNDlib", 0) == 0 || text.find("NODES (") != std::string::npos)
              ? "sndlib"
              : "plain";
  }
  if (fmt == "sndlib") return load_sndlib(text);
  if (fmt == "plain") return load_plain(text);
  throw std::invalid_argument("unknown topology format '" + format + "'");
}

std::vector<std::string> validate(const NetworkGraph& g) {
  std::vector<std::string> out;
  for (const auto& n : g.nodes()) {
    if (n.capacity_mbps && *n.capacity_mbps <= 0)
      out.push_back("node " + std::to_string(n.id) + " (" + n.name + "): capacity must be > 0");
    if (n.unit_cost && *n.unit_cost < 0)
      out.push_back("node " + std::to_string(n.id) + " (" + n.name + "): cost must be >= 0");
  }
  for (const auto& l : g.links()) {
    std::string lname = "link " + std::to_string(l.u) + "-" + std::to_string(l.v);
    if (l.delay_ms <= 0) out.push_back(lname + ": delay must be > 0");
    if (l.bandwidth_mbps <= 0) out.push_back(lname + ": bandwidth must be > 0");
    if (l.loss && (*l.loss < 0 || *l.loss >= 1)) out.push_back(lname + ": loss must be in [0,1)");
    if (l.u == l.v) out.push_back(lname + ": self-loop");
    if (l.u >= g.node_count() || l.v >= g.node_count() || l.u < 0 || l.v < 0)
      out.push_back(lname + ": endpoint out of range");
  }
  // Connectivity over real nodes only; the fictive node never counts.
  if (g.node_count() > 1) {
    std::vector<int> comp(g.node_count(), -1);
    int ncomp = 0;
    for (int s = 0; s < g.node_count(); ++s) {
      if (comp[s] >= 0) continue;
      std::queue<int> q;
      q.push(s);
      comp[s] = ncomp;
      while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (const auto& [v, lid] : g.adjacency(u))
          if (comp[v] < 0) comp[v] = ncomp, q.push(v);
      }
      ++ncomp;
    }
    if (ncomp > 1) {
      std::string msg = "graph is disconnected: " + std::to_string(ncomp) + " components:";
      for (int c = 0; c < ncomp; ++c) {
        msg += " {";
        bool first = true;
        for (int n = 0; n < g.node_count(); ++n)
          if (comp[n] == c) {
            if (!first) msg += ",";
            msg += std::to_string(n);
            first = false;
          }
        msg += "}";
      }
      out.push_back(msg);
    }
  }
  return out;
}

}  // namespace tars
