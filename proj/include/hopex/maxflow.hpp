#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "hopex/errors.hpp"

namespace hopex {

// Flow per original directed arc, summed over parallel arcs.
using ArcFlow = std::map<std::pair<int, int>, long long>;

struct MaxFlowResult {
  long long value = 0;
  std::vector<char> source_side;  // residual-reachable from the source (a min cut)
  ArcFlow arc_flow;
};

/** Directed network with integral capacities; max flow via Dinic's algorithm. */
class FlowNetwork {
 public:
  explicit FlowNetwork(int n) : adj_(static_cast<std::size_t>(n)) {}

  int n() const { return static_cast<int>(adj_.size()); }

  // Adds a directed arc and its zero-capacity residual twin.
  void add_arc(int from, int to, long long cap) {
    if (from < 0 || to < 0 || from >= n() || to >= n() || from == to || cap < 0)
      throw PreconditionViolated("flow arc endpoints out of range or negative capacity");
    auto f = static_cast<std::size_t>(from), t = static_cast<std::size_t>(to);
    adj_[f].push_back({to, cap, static_cast<int>(adj_[t].size()), cap, true});
    adj_[t].push_back({from, 0, static_cast<int>(adj_[f].size()) - 1, 0, false});
  }

  MaxFlowResult max_flow(int s, int t) const {
    if (s < 0 || t < 0 || s >= n() || t >= n() || s == t)
      throw PreconditionViolated("flow terminals out of range or equal");
    FlowNetwork net = *this;
    const long long kInf = std::numeric_limits<long long>::max();
    std::vector<int> level(static_cast<std::size_t>(n()));
    std::vector<std::size_t> it(static_cast<std::size_t>(n()));

    auto bfs = [&]() {
      std::fill(level.begin(), level.end(), -1);
      level[static_cast<std::size_t>(s)] = 0;
      std::deque<int> queue{s};
      while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (const Arc& a : net.adj_[static_cast<std::size_t>(v)])
          if (a.cap > 0 && level[static_cast<std::size_t>(a.to)] < 0) {
            level[static_cast<std::size_t>(a.to)] = level[static_cast<std::size_t>(v)] + 1;
            queue.push_back(a.to);
          }
      }
      return level[static_cast<std::size_t>(t)] >= 0;
    };
    auto dfs = [&](auto&& self, int v, long long pushed) -> long long {
      if (v == t) return pushed;
      for (std::size_t& i = it[static_cast<std::size_t>(v)];
           i < net.adj_[static_cast<std::size_t>(v)].size(); ++i) {
        Arc& a = net.adj_[static_cast<std::size_t>(v)][i];
        if (a.cap <= 0 || level[static_cast<std::size_t>(a.to)] !=
                              level[static_cast<std::size_t>(v)] + 1)
          continue;
        long long got = self(self, a.to, std::min(pushed, a.cap));
        if (got > 0) {
          a.cap -= got;
          net.adj_[static_cast<std::size_t>(a.to)][static_cast<std::size_t>(a.rev)].cap += got;
          return got;
        }
      }
      return 0;
    };

    MaxFlowResult result;
    while (bfs()) {
      std::fill(it.begin(), it.end(), 0);
      while (long long got = dfs(dfs, s, kInf)) result.value += got;
    }

    result.source_side.assign(static_cast<std::size_t>(n()), 0);
    result.source_side[static_cast<std::size_t>(s)] = 1;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (const Arc& a : net.adj_[static_cast<std::size_t>(v)])
        if (a.cap > 0 && !result.source_side[static_cast<std::size_t>(a.to)]) {
          result.source_side[static_cast<std::size_t>(a.to)] = 1;
          queue.push_back(a.to);
        }
    }

    for (int v = 0; v < n(); ++v)
      for (const Arc& a : net.adj_[static_cast<std::size_t>(v)])
        if (a.forward && a.orig > a.cap) result.arc_flow[{v, a.to}] += a.orig - a.cap;
    return result;
  }

 private:
  struct Arc {
    int to;
    long long cap;
    int rev;  // index of the twin arc in adj_[to]
    long long orig;
    bool forward;
  };
  std::vector<std::vector<Arc>> adj_;
};

struct FlowPath {
  std::vector<int> vertices;
  long long value = 0;
};

namespace flow_detail {

using OutFlow = std::map<int, std::map<int, long long>>;

inline OutFlow out_adjacency(const ArcFlow& flow) {
  OutFlow out;
  for (const auto& [arc, value] : flow)
    if (value > 0) out[arc.first][arc.second] = value;
  return out;
}

// Any directed cycle among positive arcs, as a vertex sequence (closing arc
// from back() to front()), or nullopt if the positive arcs form a DAG.
inline std::optional<std::vector<int>> find_cycle(int n, const OutFlow& out) {
  std::vector<int> color(static_cast<std::size_t>(n), 0);  // 0 new, 1 open, 2 done
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  for (int root = 0; root < n; ++root) {
    if (color[static_cast<std::size_t>(root)] != 0) continue;
    std::vector<std::pair<int, std::size_t>> frames{{root, 0}};
    color[static_cast<std::size_t>(root)] = 1;
    while (!frames.empty()) {
      int v = frames.back().first;
      std::size_t idx = frames.back().second;
      auto row = out.find(v);
      std::size_t deg = row == out.end() ? 0 : row->second.size();
      if (idx >= deg) {
        color[static_cast<std::size_t>(v)] = 2;
        frames.pop_back();
        continue;
      }
      ++frames.back().second;
      auto succ = row->second.begin();
      std::advance(succ, static_cast<long>(idx));
      int u = succ->first;
      if (color[static_cast<std::size_t>(u)] == 0) {
        color[static_cast<std::size_t>(u)] = 1;
        parent[static_cast<std::size_t>(u)] = v;
        frames.push_back({u, 0});
      } else if (color[static_cast<std::size_t>(u)] == 1) {
        std::vector<int> cycle;
        for (int w = v; w != u; w = parent[static_cast<std::size_t>(w)]) cycle.push_back(w);
        cycle.push_back(u);
        std::reverse(cycle.begin(), cycle.end());  // u ... v, closes v -> u
        return cycle;
      }
    }
  }
  return std::nullopt;
}

inline void subtract_arc(OutFlow& out, int from, int to, long long value) {
  auto& row = out[from];
  auto cell = row.find(to);
  if (cell == row.end() || cell->second < value)
    throw Error("flow decomposition subtracted more than the arc carries");
  cell->second -= value;
  if (cell->second == 0) row.erase(cell);
  if (row.empty()) out.erase(from);
}

inline void cancel_cycles(int n, OutFlow& out) {
  while (auto cycle = find_cycle(n, out)) {
    long long bottleneck = std::numeric_limits<long long>::max();
    for (std::size_t i = 0; i < cycle->size(); ++i) {
      int a = (*cycle)[i], b = (*cycle)[(i + 1) % cycle->size()];
      bottleneck = std::min(bottleneck, out.at(a).at(b));
    }
    for (std::size_t i = 0; i < cycle->size(); ++i)
      subtract_arc(out, (*cycle)[i], (*cycle)[(i + 1) % cycle->size()], bottleneck);
  }
}

}  // namespace flow_detail

/**
 * Decompose an s-t flow into simple paths.  Directed cycles in the flow are
 * canceled first (their value is discarded); the remaining paths carry the
 * full s-t value.  Successors are taken smallest-id first, so the output is
 * deterministic.
 */
inline std::vector<FlowPath> flow_path_decomposition(int n, int s, int t, const ArcFlow& flow) {
  auto out = flow_detail::out_adjacency(flow);
  flow_detail::cancel_cycles(n, out);
  std::vector<FlowPath> paths;
  while (true) {
    std::vector<int> path{s};
    while (path.back() != t) {
      auto row = out.find(path.back());
      if (row == out.end()) break;
      path.push_back(row->second.begin()->first);
      if (path.size() > static_cast<std::size_t>(n))
        throw Error("flow decomposition walk exceeded the vertex count");
    }
    if (path.back() != t) {
      if (path.size() > 1) throw Error("flow conservation violated away from the terminals");
      break;
    }
    long long bottleneck = std::numeric_limits<long long>::max();
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
      bottleneck = std::min(bottleneck, out.at(path[i]).at(path[i + 1]));
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
      flow_detail::subtract_arc(out, path[i], path[i + 1], bottleneck);
    paths.push_back({std::move(path), bottleneck});
  }
  return paths;
}

}  // namespace hopex
