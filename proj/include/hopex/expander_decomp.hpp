#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hopex/errors.hpp"
#include "hopex/multigraph.hpp"
#include "hopex/rng.hpp"
#include "hopex/routing.hpp"

namespace hopex {

using Cut = std::vector<VertexPair>;  // one entry per removed edge copy

/**
 * Parameters of the certify-or-cut decomposition.  The oracle certifies that
 * every sampled h-hop unit demand routes with at most floor(s*h) hops and
 * congestion at most kappa/phi, or keeps cutting the most congested edge
 * until it can — within a budget of floor(h*s*kappa*phi*n) removed copies.
 */
struct DecompositionParams {
  int h = 1;
  double s = 1.0;
  double phi = 0.1;
  double kappa = 1.0;
  int random_matchings = 32;   // random maximal matchings sampled per round
  int adversarial_roots = 8;   // BFS roots for level-cut crossing demands

  int verify_hops() const { return static_cast<int>(std::floor(s * h + 1e-9)); }
  double congestion_bound() const { return kappa / phi; }
  long long budget(int n) const {
    return static_cast<long long>(std::floor(h * s * kappa * phi * n + 1e-9));
  }
};

struct ExpanderDecomposition {
  Cut cut;
  long long budget = 0;
  int rounds = 0;           // certify-or-cut rounds, including the certifying one
  int demands_checked = 0;  // total demands verified across all rounds
};

namespace decomp_detail {

// Greedy maximal matching of pairs at hop distance <= h, one unit per pair.
// `allowed` restricts partners (pass nullptr for no restriction); vertices are
// visited in a shuffled order and partners drawn uniformly from the h-ball.
inline Demand matching_demand(const MultiGraph& g, int h, Rng& rng,
                              const std::vector<char>* side = nullptr) {
  std::vector<int> order(static_cast<std::size_t>(g.n()));
  for (int v = 0; v < g.n(); ++v) order[static_cast<std::size_t>(v)] = v;
  rng.shuffle(order);
  std::vector<char> matched(static_cast<std::size_t>(g.n()), 0);
  Demand demand;
  for (int v : order) {
    if (matched[static_cast<std::size_t>(v)]) continue;
    std::vector<int> partners;
    for (int u : ball(g, v, h)) {
      if (u == v || matched[static_cast<std::size_t>(u)]) continue;
      if (side && (*side)[static_cast<std::size_t>(u)] == (*side)[static_cast<std::size_t>(v)])
        continue;
      partners.push_back(u);
    }
    if (partners.empty()) continue;
    int u = partners[static_cast<std::size_t>(rng.below(partners.size()))];
    matched[static_cast<std::size_t>(v)] = 1;
    matched[static_cast<std::size_t>(u)] = 1;
    demand.add(v, u, 1.0);
  }
  return demand;
}

// The sparsest BFS level cut from `root`: cut edges over the smaller side's
// volume, minimized over level thresholds.  Returns the side indicator, or
// nullopt when no threshold leaves both sides nonempty.
inline std::optional<std::vector<char>> sparsest_level_cut(const MultiGraph& g, int root) {
  auto dist_from_root = bfs_distances(g, root);
  int max_level = 0;
  for (int d : dist_from_root) max_level = std::max(max_level, d);
  if (max_level < 1) return std::nullopt;

  std::optional<std::vector<char>> best;
  double best_sparsity = 0.0;
  for (int level = 0; level < max_level; ++level) {
    std::vector<char> side(static_cast<std::size_t>(g.n()), 0);
    long long inside = 0;
    for (int v = 0; v < g.n(); ++v)
      if (dist_from_root[static_cast<std::size_t>(v)] >= 0 &&
          dist_from_root[static_cast<std::size_t>(v)] <= level) {
        side[static_cast<std::size_t>(v)] = 1;
        ++inside;
      }
    if (inside == 0 || inside == g.n()) continue;
    long long crossing = 0, vol_in = 0, vol_out = 0;
    for (auto [u, v, mult] : g.bundles()) {
      bool su = side[static_cast<std::size_t>(u)], sv = side[static_cast<std::size_t>(v)];
      if (su != sv) crossing += mult;
      vol_in += (su ? mult : 0) + (sv ? mult : 0);
      vol_out += (!su ? mult : 0) + (!sv ? mult : 0);
    }
    long long denom = std::min(vol_in, vol_out);
    if (denom == 0) continue;
    double sparsity = static_cast<double>(crossing) / static_cast<double>(denom);
    if (!best || sparsity < best_sparsity) {
      best = std::move(side);
      best_sparsity = sparsity;
    }
  }
  return best;
}

}  // namespace decomp_detail

/**
 * Sample a batch of h-hop unit demands on g: `random_matchings` greedy maximal
 * matchings over shuffled vertex orders, plus one matching per BFS root forced
 * to cross that root's sparsest level cut.  Empty matchings are skipped.
 */
inline std::vector<Demand> sample_unit_demands(const MultiGraph& g,
                                               const DecompositionParams& params, Rng& rng) {
  std::vector<Demand> batch;
  for (int i = 0; i < params.random_matchings; ++i) {
    Demand d = decomp_detail::matching_demand(g, params.h, rng);
    if (d.total() > 0) batch.push_back(std::move(d));
  }
  int roots = std::min(g.n(), params.adversarial_roots);
  for (int root = 0; root < roots; ++root) {
    auto side = decomp_detail::sparsest_level_cut(g, root);
    if (!side) continue;
    Demand d = decomp_detail::matching_demand(g, params.h, rng, &*side);
    if (d.total() > 0) batch.push_back(std::move(d));
  }
  return batch;
}

/**
 * Certify-or-cut: repeatedly sample unit demands on G - C and verify them at
 * (floor(s*h) hops, kappa/phi congestion).  A round with every demand routable
 * certifies and returns C.  Otherwise one copy of the most congested edge in a
 * minimum-congestion routing of the failing demand joins C.  Throws
 * BudgetExhausted once |C| would exceed floor(h*s*kappa*phi*n).
 */
inline ExpanderDecomposition decompose_expander(const MultiGraph& g,
                                                const DecompositionParams& params,
                                                std::uint64_t seed) {
  if (params.h < 1 || params.s < 1.0 || params.phi <= 0.0 || params.kappa <= 0.0)
    throw PreconditionViolated("decomposition needs h >= 1, s >= 1, phi > 0, kappa > 0");
  Rng rng(seed);
  ExpanderDecomposition result;
  result.budget = params.budget(g.n());
  const int hops = params.verify_hops();
  const double bound = params.congestion_bound();
  RouteOptions opts;  // exact column-generation routing

  MultiGraph current = g;
  while (true) {
    ++result.rounds;
    auto batch = sample_unit_demands(current, params, rng);
    const Demand* failing = nullptr;
    for (const auto& demand : batch) {
      ++result.demands_checked;
      auto verdict = verify_routing(current, demand, hops, bound, opts);
      if (std::holds_alternative<RoutingInfeasible>(verdict)) {
        failing = &demand;
        break;
      }
    }
    if (!failing) return result;

    auto routed = route_demand_exact(current, *failing, hops, opts);
    if (std::holds_alternative<RoutingInfeasible>(routed))
      throw Error("sampled demand lost its hop-feasible routing; pairs were sampled close");
    const auto& value = std::get<RouteValue>(routed);

    // Most congested bundle, lexicographically smallest on ties.
    std::optional<VertexPair> worst;
    double worst_congestion = -1.0;
    for (const auto& [bundle, load] : value.witness.flow.edge_loads()) {
      double congestion = load / static_cast<double>(current.multiplicity(bundle.first, bundle.second));
      if (congestion > worst_congestion + kRoutingTol) {
        worst_congestion = congestion;
        worst = bundle;
      }
    }
    if (!worst) throw Error("congested routing without any used edge");
    if (static_cast<long long>(result.cut.size()) + 1 > result.budget)
      throw BudgetExhausted("cut budget " + std::to_string(result.budget) +
                            " exhausted before certification");
    result.cut.push_back(*worst);
    current.remove_edge(worst->first, worst->second);
  }
}

}  // namespace hopex
