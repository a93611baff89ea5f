#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hopex/errors.hpp"
#include "hopex/flow.hpp"
#include "hopex/multigraph.hpp"
#include "hopex/simplex.hpp"

namespace hopex {

// Tolerance for routing feasibility comparisons (congestion, demand balance).
inline constexpr double kRoutingTol = 1e-9;

enum class RoutingBackend {
  ColumnGeneration,       // exact LP optimum, master problem grown on demand
  Enumerate,              // exact LP over every simple path of <= t hops
  MultiplicativeWeights,  // approximate; verdicts are labeled as such
};

struct RouteOptions {
  RoutingBackend backend = RoutingBackend::ColumnGeneration;
  long long path_budget = 1000000;  // cap for the enumeration backend
  int mw_rounds = 300;              // multiplicative-weights iterations
  double mw_step = 0.25;
};

// Why a routing query failed.  Either some demanded pair is further than t
// hops apart (then `far_pair`/`pair_distance` are set), or the congestion LP
// over <= t-hop paths has optimum above the allowed bound (`min_congestion`).
struct RoutingInfeasible {
  std::optional<VertexPair> far_pair;
  std::optional<int> pair_distance;  // unset when the pair is disconnected
  std::optional<double> min_congestion;
  bool approximate = false;

  std::string describe() const {
    if (far_pair)
      return "pair (" + std::to_string(far_pair->first) + "," +
             std::to_string(far_pair->second) + ") at distance " +
             (pair_distance ? std::to_string(*pair_distance) : std::string("inf")) +
             " exceeds the hop bound";
    return "minimum congestion " + std::to_string(min_congestion.value_or(0.0)) +
           " exceeds the allowed bound";
  }
};

struct RouteValue {
  double congestion = 0.0;  // minimal feasible congestion for the hop bound
  RoutingWitness witness;
  bool approximate = false;
};

using RoutingResult = std::variant<RoutingWitness, RoutingInfeasible>;
using RouteResult = std::variant<RouteValue, RoutingInfeasible>;

namespace routing_detail {

struct PairList {
  std::vector<VertexPair> pairs;
  std::vector<double> values;
};

inline PairList demand_pairs(const Demand& d) {
  PairList out;
  for (const auto& [pair, value] : d.entries()) {
    if (value <= 0) continue;
    out.pairs.push_back(pair);
    out.values.push_back(value);
  }
  return out;
}

// Hop-distance screen: every demanded pair must be within t hops.
inline std::optional<RoutingInfeasible> distance_certificate(const MultiGraph& g,
                                                             const PairList& list, int t) {
  for (const auto& pair : list.pairs) {
    auto d = dist(g, pair.first, pair.second);
    if (!d || *d > t) {
      RoutingInfeasible cert;
      cert.far_pair = pair;
      cert.pair_distance = d;
      return cert;
    }
  }
  return std::nullopt;
}

// Minimum-weight walk of at most t hops under nonnegative bundle weights,
// returned as a simple path (cycles excised; weights only drop).  Used both by
// column-generation pricing and by the multiplicative-weights backend.
inline std::optional<std::pair<std::vector<int>, double>> min_weight_bounded_path(
    const MultiGraph& g, int src, int dst, int t,
    const std::map<VertexPair, double>& weight) {
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = static_cast<std::size_t>(g.n());
  std::vector<double> cur(n, inf), nxt(n, inf);
  std::vector<std::vector<int>> pred(static_cast<std::size_t>(t) + 1,
                                     std::vector<int>(n, -1));
  cur[static_cast<std::size_t>(src)] = 0.0;
  double best = inf;
  int best_hops = -1;
  if (src == dst) return std::make_pair(std::vector<int>{src}, 0.0);
  for (int hop = 1; hop <= t; ++hop) {
    nxt = cur;  // a shorter walk stays competitive at higher hop counts
    for (std::size_t i = 0; i < n; ++i) pred[static_cast<std::size_t>(hop)][i] = -2;
    for (int v = 0; v < g.n(); ++v) {
      double dv = cur[static_cast<std::size_t>(v)];
      if (dv == inf) continue;
      for (int u : g.neighbors(v)) {
        auto it = weight.find(ordered_pair(u, v));
        double w = it == weight.end() ? 0.0 : it->second;
        if (dv + w < nxt[static_cast<std::size_t>(u)] - 1e-15) {
          nxt[static_cast<std::size_t>(u)] = dv + w;
          pred[static_cast<std::size_t>(hop)][static_cast<std::size_t>(u)] = v;
        }
      }
    }
    std::swap(cur, nxt);
    if (cur[static_cast<std::size_t>(dst)] < best - 1e-15) {
      best = cur[static_cast<std::size_t>(dst)];
      best_hops = hop;
    }
  }
  if (best == inf) return std::nullopt;

  // Walk backwards through the hop levels; -2 marks "carried over" levels.
  std::vector<int> walk{dst};
  int v = dst, hop = best_hops;
  while (hop > 0) {
    int p = pred[static_cast<std::size_t>(hop)][static_cast<std::size_t>(v)];
    if (p == -2 || p == -1) {
      --hop;  // value was inherited from a shorter walk
      continue;
    }
    walk.push_back(p);
    v = p;
    --hop;
  }
  std::reverse(walk.begin(), walk.end());
  if (walk.front() != src) throw Error("bounded-path extraction lost its source");

  // Excise repeated vertices; nonnegative weights keep the cost at most best.
  std::vector<int> path;
  std::map<int, std::size_t> at;
  for (int x : walk) {
    auto it = at.find(x);
    if (it != at.end()) {
      while (path.size() > it->second + 1) {
        at.erase(path.back());
        path.pop_back();
      }
      continue;
    }
    at[x] = path.size();
    path.push_back(x);
  }
  double cost = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    auto it = weight.find(ordered_pair(path[i], path[i + 1]));
    cost += it == weight.end() ? 0.0 : it->second;
  }
  return std::make_pair(path, cost);
}

// Shortest path by hops (BFS), as a fallback initial column.
inline std::vector<int> bfs_path(const MultiGraph& g, int src, int dst) {
  std::vector<int> parent(static_cast<std::size_t>(g.n()), -1);
  std::vector<int> d(static_cast<std::size_t>(g.n()), -1);
  std::deque<int> queue{src};
  d[static_cast<std::size_t>(src)] = 0;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    if (v == dst) break;
    for (int u : g.neighbors(v))
      if (d[static_cast<std::size_t>(u)] < 0) {
        d[static_cast<std::size_t>(u)] = d[static_cast<std::size_t>(v)] + 1;
        parent[static_cast<std::size_t>(u)] = v;
        queue.push_back(u);
      }
  }
  std::vector<int> path;
  for (int v = dst; v != -1; v = parent[static_cast<std::size_t>(v)]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

// Solve min-congestion over a fixed set of candidate paths per pair.  Variables
// are path flows plus the congestion bound eta; constraints are demand
// equalities and per-bundle capacity rows (only bundles touched by some path).
struct MasterSolution {
  double eta = 0.0;
  std::vector<double> path_flow;
  std::map<VertexPair, double> edge_duals;  // >= 0 pricing weights
  std::vector<double> pair_duals;
};

inline MasterSolution solve_master(const MultiGraph& g, const PairList& list,
                                   const std::vector<std::vector<std::vector<int>>>& columns) {
  int num_paths = 0;
  for (const auto& per_pair : columns) num_paths += static_cast<int>(per_pair.size());
  const int eta_var = num_paths;

  std::map<VertexPair, int> edge_row;  // bundle -> row index (after pair rows)
  std::vector<VertexPair> row_edge;
  for (const auto& per_pair : columns)
    for (const auto& path : per_pair)
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        auto key = ordered_pair(path[i], path[i + 1]);
        if (edge_row.emplace(key, static_cast<int>(row_edge.size())).second)
          row_edge.push_back(key);
      }

  const int num_pairs = static_cast<int>(list.pairs.size());
  std::vector<SimplexSolver::Row> rows(static_cast<std::size_t>(num_pairs) + row_edge.size());
  for (int p = 0; p < num_pairs; ++p) {
    rows[static_cast<std::size_t>(p)].is_equality = true;
    rows[static_cast<std::size_t>(p)].rhs = list.values[static_cast<std::size_t>(p)];
  }
  for (std::size_t e = 0; e < row_edge.size(); ++e) {
    auto& row = rows[static_cast<std::size_t>(num_pairs) + e];
    row.is_equality = false;
    row.rhs = 0.0;
    row.coeffs.emplace_back(
        eta_var, -static_cast<double>(g.multiplicity(row_edge[e].first, row_edge[e].second)));
  }
  int var = 0;
  for (int p = 0; p < num_pairs; ++p) {
    for (const auto& path : columns[static_cast<std::size_t>(p)]) {
      rows[static_cast<std::size_t>(p)].coeffs.emplace_back(var, 1.0);
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        int e = edge_row.at(ordered_pair(path[i], path[i + 1]));
        rows[static_cast<std::size_t>(num_pairs) + static_cast<std::size_t>(e)].coeffs.emplace_back(
            var, 1.0);
      }
      ++var;
    }
  }

  std::vector<double> objective(static_cast<std::size_t>(num_paths) + 1, 0.0);
  objective[static_cast<std::size_t>(eta_var)] = 1.0;
  SimplexSolver solver(num_paths + 1, std::move(objective), std::move(rows));
  auto solved = solver.solve();
  if (solved.status != SimplexSolver::Status::Optimal)
    throw Error("routing master LP did not solve to optimality");

  MasterSolution out;
  out.eta = solved.x[static_cast<std::size_t>(eta_var)];
  out.path_flow.assign(solved.x.begin(), solved.x.begin() + num_paths);
  out.pair_duals.assign(solved.duals.begin(), solved.duals.begin() + num_pairs);
  for (std::size_t e = 0; e < row_edge.size(); ++e) {
    // Capacity rows are <=, so their duals are <= 0 for this minimization;
    // pricing uses the nonnegative weights -y_e.
    double w = -solved.duals[static_cast<std::size_t>(num_pairs) + e];
    out.edge_duals[row_edge[e]] = w < 0.0 ? 0.0 : w;
  }
  return out;
}

inline Flow flow_from_columns(const PairList& list,
                              const std::vector<std::vector<std::vector<int>>>& columns,
                              const std::vector<double>& path_flow) {
  Flow flow;
  std::size_t var = 0;
  for (std::size_t p = 0; p < list.pairs.size(); ++p)
    for (const auto& path : columns[p]) {
      double x = path_flow[var++];
      if (x > 1e-12) flow.add_path(path, x);
    }
  return flow;
}

// Exact minimum congestion by column generation: grow the path set per pair
// until no <= t-hop path prices negatively under the master duals.
inline std::pair<double, Flow> min_congestion_cg(const MultiGraph& g, const PairList& list,
                                                 int t) {
  std::vector<std::vector<std::vector<int>>> columns(list.pairs.size());
  std::vector<std::set<std::vector<int>>> known(list.pairs.size());
  for (std::size_t p = 0; p < list.pairs.size(); ++p) {
    auto path = bfs_path(g, list.pairs[p].first, list.pairs[p].second);
    columns[p].push_back(path);
    known[p].insert(std::move(path));
  }

  MasterSolution master;
  for (int round = 0; round < 5000; ++round) {
    master = solve_master(g, list, columns);
    bool improved = false;
    for (std::size_t p = 0; p < list.pairs.size(); ++p) {
      auto priced = min_weight_bounded_path(g, list.pairs[p].first, list.pairs[p].second, t,
                                            master.edge_duals);
      if (!priced) continue;
      // Column with reduced cost y_pair - path weight > 0 improves the master.
      if (master.pair_duals[p] - priced->second > 1e-9 && known[p].insert(priced->first).second) {
        columns[p].push_back(priced->first);
        improved = true;
      }
    }
    if (!improved)
      return {master.eta, flow_from_columns(list, columns, master.path_flow)};
  }
  throw Error("column generation failed to converge");
}

// Exhaustive simple-path enumeration within the hop bound, then one LP solve.
inline void enumerate_paths(const MultiGraph& g, int src, int dst, int t, long long budget,
                            long long& used, std::vector<int>& stack, std::vector<char>& on_stack,
                            std::vector<std::vector<int>>& out) {
  int v = stack.back();
  if (v == dst) {
    if (++used > budget)
      throw PathBudgetExceeded("more than " + std::to_string(budget) +
                               " candidate paths; shrink the instance or raise the budget");
    out.push_back(stack);
    return;
  }
  if (static_cast<int>(stack.size()) - 1 >= t) return;
  for (int u : g.neighbors(v)) {
    if (on_stack[static_cast<std::size_t>(u)]) continue;
    on_stack[static_cast<std::size_t>(u)] = 1;
    stack.push_back(u);
    enumerate_paths(g, src, dst, t, budget, used, stack, on_stack, out);
    stack.pop_back();
    on_stack[static_cast<std::size_t>(u)] = 0;
  }
}

inline std::pair<double, Flow> min_congestion_enumerate(const MultiGraph& g, const PairList& list,
                                                        int t, long long budget) {
  std::vector<std::vector<std::vector<int>>> columns(list.pairs.size());
  long long used = 0;
  for (std::size_t p = 0; p < list.pairs.size(); ++p) {
    std::vector<int> stack{list.pairs[p].first};
    std::vector<char> on_stack(static_cast<std::size_t>(g.n()), 0);
    on_stack[static_cast<std::size_t>(list.pairs[p].first)] = 1;
    enumerate_paths(g, list.pairs[p].first, list.pairs[p].second, t, budget, used, stack,
                    on_stack, columns[p]);
    if (columns[p].empty()) throw Error("enumeration found no path for a screened pair");
  }
  auto master = solve_master(g, list, columns);
  return {master.eta, flow_from_columns(list, columns, master.path_flow)};
}

// Multiplicative weights: reroute every pair along cheap paths while edge
// weights grow with their relative load, then average the rounds.  Fast and
// approximate; results carry an `approximate` flag.
inline std::pair<double, Flow> min_congestion_mw(const MultiGraph& g, const PairList& list,
                                                 int t, const RouteOptions& opts) {
  std::map<VertexPair, double> weight;
  for (const auto& [u, v, copies] : g.bundles()) weight[{u, v}] = 1.0;
  std::map<std::vector<int>, double> accumulated;
  int executed = 0;
  for (int round = 0; round < opts.mw_rounds; ++round) {
    ++executed;
    std::map<VertexPair, double> load;
    for (std::size_t p = 0; p < list.pairs.size(); ++p) {
      auto priced = min_weight_bounded_path(g, list.pairs[p].first, list.pairs[p].second, t,
                                            weight);
      if (!priced) throw Error("mw backend lost a screened pair");
      accumulated[priced->first] += list.values[p];
      for (std::size_t i = 0; i + 1 < priced->first.size(); ++i)
        load[ordered_pair(priced->first[i], priced->first[i + 1])] += list.values[p];
    }
    double max_rel = 0.0;
    for (const auto& [key, l] : load)
      max_rel = std::max(max_rel, l / static_cast<double>(g.multiplicity(key.first, key.second)));
    if (max_rel <= 0.0) break;
    for (const auto& [key, l] : load) {
      double rel = l / static_cast<double>(g.multiplicity(key.first, key.second));
      weight[key] *= std::exp(opts.mw_step * rel / max_rel);
    }
  }
  Flow flow;
  double total_rounds = static_cast<double>(executed > 0 ? executed : 1);
  for (const auto& [path, x] : accumulated)
    if (x / total_rounds > 1e-12) flow.add_path(path, x / total_rounds);
  return {flow.empty() ? 0.0 : flow.congestion(g), flow};
}

// Cheap feasibility screen: route everything along one shortest path per pair.
// When even this stays under the congestion bound there is no need for an LP.
inline std::optional<Flow> greedy_routing(const MultiGraph& g, const PairList& list, int t,
                                          double eta) {
  Flow flow;
  std::map<VertexPair, double> load;
  for (std::size_t p = 0; p < list.pairs.size(); ++p) {
    auto path = bfs_path(g, list.pairs[p].first, list.pairs[p].second);
    if (path.size() < 2 || static_cast<int>(path.size()) - 1 > t) return std::nullopt;
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
      load[ordered_pair(path[i], path[i + 1])] += list.values[p];
    flow.add_path(std::move(path), list.values[p]);
  }
  for (const auto& [key, l] : load)
    if (l / static_cast<double>(g.multiplicity(key.first, key.second)) > eta + kRoutingTol)
      return std::nullopt;
  return flow;
}

}  // namespace routing_detail

/**
 * Minimal congestion of routing demand d along paths of at most t hops, with
 * the flow achieving it.  Exact for the ColumnGeneration and Enumerate
 * backends; the MultiplicativeWeights backend returns an upper bound and sets
 * `approximate`.
 */
inline RouteResult route_demand_exact(const MultiGraph& g, const Demand& d, int t,
                                      const RouteOptions& opts = {}) {
  auto list = routing_detail::demand_pairs(d);
  if (list.pairs.empty()) {
    RouteValue v;
    v.witness = RoutingWitness{};
    return v;
  }
  if (auto cert = routing_detail::distance_certificate(g, list, t)) return *cert;

  std::pair<double, Flow> solved;
  bool approximate = false;
  switch (opts.backend) {
    case RoutingBackend::ColumnGeneration:
      solved = routing_detail::min_congestion_cg(g, list, t);
      break;
    case RoutingBackend::Enumerate:
      solved = routing_detail::min_congestion_enumerate(g, list, t, opts.path_budget);
      break;
    case RoutingBackend::MultiplicativeWeights:
      solved = routing_detail::min_congestion_mw(g, list, t, opts);
      approximate = true;
      break;
  }
  RouteValue v;
  v.congestion = solved.first;
  v.witness = RoutingWitness::from_flow(g, std::move(solved.second));
  v.approximate = approximate;
  return v;
}

/**
 * Decide whether demand d routes along <= t-hop paths at congestion <= eta.
 * Success returns a witness that recomputes its own measures; failure returns
 * a certificate (a too-distant pair, or the LP minimum congestion).
 */
inline RoutingResult verify_routing(const MultiGraph& g, const Demand& d, int t, double eta,
                                    const RouteOptions& opts = {}) {
  auto list = routing_detail::demand_pairs(d);
  if (list.pairs.empty()) return RoutingWitness{};
  if (auto cert = routing_detail::distance_certificate(g, list, t)) return *cert;

  if (auto greedy = routing_detail::greedy_routing(g, list, t, eta))
    return RoutingWitness::from_flow(g, std::move(*greedy));

  auto routed = route_demand_exact(g, d, t, opts);
  if (std::holds_alternative<RoutingInfeasible>(routed))
    return std::get<RoutingInfeasible>(routed);
  auto& value = std::get<RouteValue>(routed);
  if (value.congestion <= eta + kRoutingTol) return std::move(value.witness);
  RoutingInfeasible cert;
  cert.min_congestion = value.congestion;
  cert.approximate = value.approximate;
  return cert;
}

}  // namespace hopex
