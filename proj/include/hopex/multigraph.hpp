#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hopex/errors.hpp"

namespace hopex {

using VertexPair = std::pair<int, int>;

inline VertexPair ordered_pair(int u, int v) { return u < v ? VertexPair{u, v} : VertexPair{v, u}; }

/**
 * Undirected multigraph with unit-length, unit-capacity edges.  Parallel
 * copies of an edge are kept as a multiplicity on the bundle {u,v}; copies add
 * capacity, so a bundle of multiplicity m absorbs m units of flow at
 * congestion 1.  Self-loops are rejected.
 */
class MultiGraph {
 public:
  MultiGraph() = default;
  explicit MultiGraph(int n) : n_(n) {
    if (n < 0) throw PreconditionViolated("negative vertex count");
  }

  int n() const { return n_; }

  void add_edge(int u, int v, long long copies = 1) {
    check_vertex(u);
    check_vertex(v);
    if (u == v) throw PreconditionViolated("self-loop rejected");
    if (copies <= 0) throw PreconditionViolated("nonpositive multiplicity");
    auto key = ordered_pair(u, v);
    auto [it, fresh] = mult_.try_emplace(key, 0);
    if (fresh) {
      adj_[u].push_back(v);
      adj_[v].push_back(u);
    }
    it->second += copies;
    m_ += copies;
  }

  // Remove `copies` parallel copies of {u,v}; removing more than exist throws.
  void remove_edge(int u, int v, long long copies = 1) {
    auto it = mult_.find(ordered_pair(u, v));
    if (it == mult_.end() || it->second < copies)
      throw PreconditionViolated("removing more copies of {" + std::to_string(u) + "," +
                                 std::to_string(v) + "} than present");
    it->second -= copies;
    m_ -= copies;
    if (it->second == 0) {
      mult_.erase(it);
      drop_adj(u, v);
      drop_adj(v, u);
    }
  }

  long long multiplicity(int u, int v) const {
    auto it = mult_.find(ordered_pair(u, v));
    return it == mult_.end() ? 0 : it->second;
  }

  // Total number of edge copies.
  long long num_edges() const { return m_; }

  // Distinct neighbors of v (parallel copies collapse).
  std::vector<int> neighbors(int v) const {
    check_vertex(v);
    auto it = adj_.find(v);
    if (it == adj_.end()) return {};
    std::vector<int> out = it->second;
    std::sort(out.begin(), out.end());
    return out;
  }

  // Degree counting copies; the capacity leaving v.
  long long degree(int v) const {
    check_vertex(v);
    long long d = 0;
    auto it = adj_.find(v);
    if (it == adj_.end()) return 0;
    for (int u : it->second) d += multiplicity(v, u);
    return d;
  }

  // Number of distinct neighbors.
  int distinct_degree(int v) const { return static_cast<int>(neighbors(v).size()); }

  long long max_degree() const {
    long long d = 0;
    for (int v = 0; v < n_; ++v) d = std::max(d, degree(v));
    return d;
  }

  // Bundles as (u, v, multiplicity) with u < v, in lexicographic order.
  std::vector<std::tuple<int, int, long long>> bundles() const {
    std::vector<std::tuple<int, int, long long>> out;
    out.reserve(mult_.size());
    for (const auto& [key, copies] : mult_) out.emplace_back(key.first, key.second, copies);
    return out;
  }

 private:
  void check_vertex(int v) const {
    if (v < 0 || v >= n_)
      throw PreconditionViolated("vertex " + std::to_string(v) + " out of range [0," +
                                 std::to_string(n_) + ")");
  }
  void drop_adj(int u, int v) {
    auto& lst = adj_[u];
    lst.erase(std::find(lst.begin(), lst.end(), v));
    if (lst.empty()) adj_.erase(u);
  }

  int n_ = 0;
  long long m_ = 0;
  std::map<VertexPair, long long> mult_;
  std::map<int, std::vector<int>> adj_;
};

// BFS distances from src; -1 encodes unreachable internally.
inline std::vector<int> bfs_distances(const MultiGraph& g, int src) {
  std::vector<int> dist(static_cast<std::size_t>(g.n()), -1);
  std::deque<int> queue;
  dist[static_cast<std::size_t>(src)] = 0;
  queue.push_back(src);
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int u : g.neighbors(v)) {
      if (dist[static_cast<std::size_t>(u)] < 0) {
        dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
        queue.push_back(u);
      }
    }
  }
  return dist;
}

// Hop distance; disconnected pairs are a distinct "unreachable" result.
inline std::optional<int> dist(const MultiGraph& g, int u, int v) {
  auto d = bfs_distances(g, u);
  int dv = d[static_cast<std::size_t>(v)];
  if (dv < 0) return std::nullopt;
  return dv;
}

// All vertices within hop distance r of v, ascending.
inline std::vector<int> ball(const MultiGraph& g, int v, int r) {
  auto d = bfs_distances(g, v);
  std::vector<int> out;
  for (int u = 0; u < g.n(); ++u)
    if (d[static_cast<std::size_t>(u)] >= 0 && d[static_cast<std::size_t>(u)] <= r)
      out.push_back(u);
  return out;
}

// Weak diameter of a vertex set: max pairwise distance measured in the whole
// of g.  Empty/singleton sets have diameter 0; a disconnected pair makes the
// diameter unreachable.
inline std::optional<int> weak_diameter(const MultiGraph& g, const std::vector<int>& set) {
  int best = 0;
  for (int u : set) {
    auto d = bfs_distances(g, u);
    for (int v : set) {
      int dv = d[static_cast<std::size_t>(v)];
      if (dv < 0) return std::nullopt;
      best = std::max(best, dv);
    }
  }
  return best;
}

inline std::optional<int> diameter(const MultiGraph& g) {
  std::vector<int> all(static_cast<std::size_t>(g.n()));
  for (int v = 0; v < g.n(); ++v) all[static_cast<std::size_t>(v)] = v;
  return weak_diameter(g, all);
}

// G minus a list of edge copies (a cut).  Each listed pair removes one copy.
inline MultiGraph subtract(const MultiGraph& g, const std::vector<VertexPair>& cut) {
  MultiGraph out = g;
  for (auto [u, v] : cut) out.remove_edge(u, v);
  return out;
}

/**
 * Directed demand: nonnegative value per ordered vertex pair.
 */
class Demand {
 public:
  void add(int u, int v, double value) {
    if (value < 0) throw PreconditionViolated("negative demand");
    if (u == v) throw PreconditionViolated("demand between a vertex and itself");
    if (value == 0) return;
    entries_[{u, v}] += value;
  }

  const std::map<VertexPair, double>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  double total() const {
    double t = 0.0;
    for (const auto& [pair, value] : entries_) t += value;
    return t;
  }

  // At most one unit leaving and entering each vertex.
  bool is_unit() const {
    std::map<int, double> out_mass, in_mass;
    for (const auto& [pair, value] : entries_) {
      out_mass[pair.first] += value;
      in_mass[pair.second] += value;
    }
    for (const auto& [v, mass] : out_mass)
      if (mass > 1.0 + 1e-9) return false;
    for (const auto& [v, mass] : in_mass)
      if (mass > 1.0 + 1e-9) return false;
    return true;
  }

  // Every demanded pair within h hops.
  bool is_h_hop(const MultiGraph& g, int h) const {
    for (const auto& [pair, value] : entries_) {
      auto d = dist(g, pair.first, pair.second);
      if (!d || *d > h) return false;
    }
    return true;
  }

 private:
  std::map<VertexPair, double> entries_;
};

// ---- text formats -----------------------------------------------------------
//
// Edge list: first non-comment line "n m", then m lines "u v" (0-based).
// Demands: lines "u v value".  Cut files: lines "u v", one removed copy each.
// '#' starts a comment; blank lines are skipped.

namespace io_detail {
inline bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
  }
  return false;
}
}  // namespace io_detail

inline MultiGraph parse_edge_list(std::istream& in) {
  std::string line;
  if (!io_detail::next_content_line(in, line))
    throw PreconditionViolated("edge list: missing header line");
  std::istringstream header(line);
  long long n = 0, m = 0;
  if (!(header >> n >> m)) throw PreconditionViolated("edge list: bad header");
  MultiGraph g(static_cast<int>(n));
  for (long long i = 0; i < m; ++i) {
    if (!io_detail::next_content_line(in, line))
      throw PreconditionViolated("edge list: expected " + std::to_string(m) + " edges");
    std::istringstream row(line);
    int u = 0, v = 0;
    if (!(row >> u >> v)) throw PreconditionViolated("edge list: bad edge line");
    g.add_edge(u, v);
  }
  return g;
}

inline void write_edge_list(std::ostream& out, const MultiGraph& g) {
  out << g.n() << ' ' << g.num_edges() << '\n';
  for (const auto& [u, v, copies] : g.bundles())
    for (long long c = 0; c < copies; ++c) out << u << ' ' << v << '\n';
}

inline Demand parse_demands(std::istream& in) {
  Demand d;
  std::string line;
  while (io_detail::next_content_line(in, line)) {
    std::istringstream row(line);
    int u = 0, v = 0;
    double value = 0.0;
    if (!(row >> u >> v >> value)) throw PreconditionViolated("demand file: bad line");
    d.add(u, v, value);
  }
  return d;
}

inline void write_demands(std::ostream& out, const Demand& d) {
  for (const auto& [pair, value] : d.entries())
    out << pair.first << ' ' << pair.second << ' ' << value << '\n';
}

inline std::vector<VertexPair> parse_cut(std::istream& in) {
  std::vector<VertexPair> cut;
  std::string line;
  while (io_detail::next_content_line(in, line)) {
    std::istringstream row(line);
    int u = 0, v = 0;
    if (!(row >> u >> v)) throw PreconditionViolated("cut file: bad line");
    cut.emplace_back(u, v);
  }
  return cut;
}

inline void write_cut(std::ostream& out, const std::vector<VertexPair>& cut) {
  for (auto [u, v] : cut) out << u << ' ' << v << '\n';
}

}  // namespace hopex
