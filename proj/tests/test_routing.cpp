#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <variant>
#include <vector>

#include "hopex/rng.hpp"
#include "hopex/routing.hpp"

using namespace hopex;

namespace {

MultiGraph complete_graph(int n) {
  MultiGraph g(n);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) g.add_edge(u, v);
  return g;
}

// All simple paths from u to v with at most t edges.
void collect_paths(const MultiGraph& g, int v, int target, int t, std::vector<int>& cur,
                   std::vector<char>& used, std::vector<std::vector<int>>& out) {
  if (v == target) {
    out.push_back(cur);
    return;
  }
  if (static_cast<int>(cur.size()) - 1 >= t) return;
  for (int w : g.neighbors(v)) {
    if (used[static_cast<std::size_t>(w)]) continue;
    used[static_cast<std::size_t>(w)] = 1;
    cur.push_back(w);
    collect_paths(g, w, target, t, cur, used, out);
    cur.pop_back();
    used[static_cast<std::size_t>(w)] = 0;
  }
}

std::vector<std::vector<int>> simple_paths(const MultiGraph& g, int u, int v, int t) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur{u};
  std::vector<char> used(static_cast<std::size_t>(g.n()), 0);
  used[static_cast<std::size_t>(u)] = 1;
  collect_paths(g, u, v, t, cur, used, out);
  return out;
}

struct BruteInstance {
  std::vector<std::vector<std::vector<int>>> pair_paths;  // paths per demanded pair
  std::vector<int> units;                                 // eighths per pair
};

// Exhaustive unit assignment in 1/8 steps, branch-and-bound on max edge load.
// Returns the minimal congestion over assignments, or nullopt if some pair
// has no path (then the LP must be infeasible too).
void brute_assign(const BruteInstance& inst, std::size_t pair, int unit,
                  std::map<VertexPair, int>& load, int current_max, int& best) {
  if (current_max >= best) return;
  if (pair == inst.pair_paths.size()) {
    best = current_max;
    return;
  }
  if (unit == inst.units[pair]) {
    brute_assign(inst, pair + 1, 0, load, current_max, best);
    return;
  }
  for (const auto& path : inst.pair_paths[pair]) {
    int new_max = current_max;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      int l = (load[ordered_pair(path[i], path[i + 1])] += 1);
      new_max = std::max(new_max, l);
    }
    brute_assign(inst, pair, unit + 1, load, new_max, best);
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
      load[ordered_pair(path[i], path[i + 1])] -= 1;
  }
}

std::optional<double> brute_min_congestion(const MultiGraph& g, const Demand& d, int t) {
  BruteInstance inst;
  for (const auto& [pair, value] : d.entries()) {
    auto paths = simple_paths(g, pair.first, pair.second, t);
    if (paths.empty()) return std::nullopt;
    inst.pair_paths.push_back(std::move(paths));
    inst.units.push_back(static_cast<int>(std::lround(value * 8.0)));
  }
  int best = 1 << 20;
  std::map<VertexPair, int> load;
  brute_assign(inst, 0, 0, load, 0, best);
  return static_cast<double>(best) / 8.0;
}

}  // namespace

TEST_CASE("exact congestion on elementary instances") {
  SECTION("single edge carries its unit") {
    MultiGraph g(2);
    g.add_edge(0, 1);
    Demand d;
    d.add(0, 1, 1.0);
    auto r = route_demand_exact(g, d, 1);
    REQUIRE(std::holds_alternative<RouteValue>(r));
    CHECK(std::get<RouteValue>(r).congestion == Catch::Approx(1.0).margin(1e-9));
  }
  SECTION("two parallel copies halve the load") {
    MultiGraph g(2);
    g.add_edge(0, 1, 2);
    Demand d;
    d.add(0, 1, 1.0);
    auto r = route_demand_exact(g, d, 1);
    REQUIRE(std::holds_alternative<RouteValue>(r));
    CHECK(std::get<RouteValue>(r).congestion == Catch::Approx(0.5).margin(1e-9));
  }
  SECTION("crossed demands on the 4-cycle split evenly") {
    MultiGraph g(4);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(2, 3);
    g.add_edge(3, 0);
    Demand d;
    d.add(0, 2, 1.0);
    d.add(1, 3, 1.0);
    auto r = route_demand_exact(g, d, 2);
    REQUIRE(std::holds_alternative<RouteValue>(r));
    auto& value = std::get<RouteValue>(r);
    CHECK(value.congestion == Catch::Approx(1.0).margin(1e-9));
    CHECK(value.witness.max_hops <= 2);

    auto verdict = verify_routing(g, d, 2, 1.0);
    REQUIRE(std::holds_alternative<RoutingWitness>(verdict));
    CHECK(std::get<RoutingWitness>(verdict).max_congestion <= 1.0 + 1e-9);
  }
}

TEST_CASE("hop screening produces a distance certificate") {
  MultiGraph g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  Demand d;
  d.add(0, 2, 1.0);
  auto verdict = verify_routing(g, d, 1, 10.0);
  REQUIRE(std::holds_alternative<RoutingInfeasible>(verdict));
  auto& cert = std::get<RoutingInfeasible>(verdict);
  REQUIRE(cert.far_pair.has_value());
  CHECK(*cert.far_pair == VertexPair{0, 2});
  CHECK(cert.pair_distance == 2);

  // Raising the hop bound fixes it.
  CHECK(std::holds_alternative<RoutingWitness>(verify_routing(g, d, 2, 1.0)));
}

TEST_CASE("direct matching on the complete graph") {
  auto g = complete_graph(4);
  Demand d;
  d.add(0, 1, 1.0);
  d.add(2, 3, 1.0);
  auto verdict = verify_routing(g, d, 1, 1.0);
  REQUIRE(std::holds_alternative<RoutingWitness>(verdict));
  auto& w = std::get<RoutingWitness>(verdict);
  CHECK(w.max_hops == 1);
  CHECK(w.max_congestion <= 1.0 + 1e-9);
}

TEST_CASE("witnesses recompute their own measures") {
  auto g = complete_graph(5);
  Demand d;
  d.add(0, 4, 1.0);
  d.add(1, 3, 0.5);
  auto verdict = verify_routing(g, d, 2, 1.0);
  REQUIRE(std::holds_alternative<RoutingWitness>(verdict));
  auto& w = std::get<RoutingWitness>(verdict);

  auto again = RoutingWitness::from_flow(g, w.flow);
  CHECK(again.max_hops == w.max_hops);
  CHECK(again.max_congestion == Catch::Approx(w.max_congestion).margin(1e-12));

  auto routed = w.flow.routed_demand();
  for (const auto& [pair, value] : d.entries())
    CHECK(routed.entries().at(pair) == Catch::Approx(value).margin(1e-6));
  CHECK(routed.total() == Catch::Approx(d.total()).margin(1e-6));
}

TEST_CASE("infeasible congestion reports the LP minimum") {
  MultiGraph g(3);  // path 0-1-2: both demands must share edge (1,2)
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  Demand d;
  d.add(0, 2, 1.0);
  d.add(1, 2, 1.0);
  auto verdict = verify_routing(g, d, 2, 1.5);
  REQUIRE(std::holds_alternative<RoutingInfeasible>(verdict));
  auto& cert = std::get<RoutingInfeasible>(verdict);
  REQUIRE(cert.min_congestion.has_value());
  CHECK(*cert.min_congestion == Catch::Approx(2.0).margin(1e-6));
  CHECK_FALSE(cert.describe().empty());
}

TEST_CASE("backends agree on the exact minimum") {
  Rng rng(606);
  RouteOptions enumerate;
  enumerate.backend = RoutingBackend::Enumerate;
  for (int i = 0; i < 25; ++i) {
    int n = 4 + static_cast<int>(rng.below(4));
    MultiGraph g(n);
    for (int v = 1; v < n; ++v) g.add_edge(static_cast<int>(rng.below(static_cast<std::uint64_t>(v))), v);
    for (int extra = 0; extra < n; ++extra) {
      int u = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      if (u != v) g.add_edge(u, v);
    }
    Demand d;
    for (int j = 0; j < 2; ++j) {
      int u = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      if (u != v) d.add(u, v, 0.5 + 0.5 * rng.unit());
    }
    if (d.empty()) continue;
    auto cg = route_demand_exact(g, d, 3);
    auto en = route_demand_exact(g, d, 3, enumerate);
    REQUIRE(cg.index() == en.index());
    if (std::holds_alternative<RouteValue>(cg)) {
      CHECK(std::get<RouteValue>(cg).congestion ==
            Catch::Approx(std::get<RouteValue>(en).congestion).margin(1e-6));
      CHECK_FALSE(std::get<RouteValue>(cg).approximate);
    }
  }
}

TEST_CASE("multiplicative weights upper-bounds the optimum and says so") {
  auto g = complete_graph(5);
  Demand d;
  d.add(0, 1, 1.0);
  d.add(2, 3, 1.0);
  d.add(0, 4, 1.0);
  RouteOptions mw;
  mw.backend = RoutingBackend::MultiplicativeWeights;
  auto approx = route_demand_exact(g, d, 2, mw);
  auto exact = route_demand_exact(g, d, 2);
  REQUIRE(std::holds_alternative<RouteValue>(approx));
  REQUIRE(std::holds_alternative<RouteValue>(exact));
  CHECK(std::get<RouteValue>(approx).approximate);
  CHECK(std::get<RouteValue>(approx).congestion >=
        std::get<RouteValue>(exact).congestion - 1e-9);
  // The approximate flow is still a real routing of the demand.
  auto recheck = RoutingWitness::from_flow(g, std::get<RouteValue>(approx).witness.flow);
  CHECK(recheck.max_hops <= 2);
}

TEST_CASE("path enumeration budget is enforced") {
  auto g = complete_graph(7);
  Demand d;
  d.add(0, 6, 1.0);
  RouteOptions opts;
  opts.backend = RoutingBackend::Enumerate;
  opts.path_budget = 3;
  CHECK_THROWS_AS(route_demand_exact(g, d, 3, opts), PathBudgetExceeded);
}

TEST_CASE("feasibility is monotone in hops, congestion, and edges") {
  Rng rng(707);
  for (int i = 0; i < 30; ++i) {
    int n = 4 + static_cast<int>(rng.below(4));
    MultiGraph g(n);
    for (int v = 1; v < n; ++v) g.add_edge(static_cast<int>(rng.below(static_cast<std::uint64_t>(v))), v);
    Demand d;
    int u = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    if (u == v) continue;
    d.add(u, v, 1.0);
    d.add(v, u, 0.5);
    int t = 2 + static_cast<int>(rng.below(2));
    double eta = 0.5 + rng.unit();
    bool feasible = std::holds_alternative<RoutingWitness>(verify_routing(g, d, t, eta));
    if (!feasible) continue;
    CHECK(std::holds_alternative<RoutingWitness>(verify_routing(g, d, t + 1, eta)));
    CHECK(std::holds_alternative<RoutingWitness>(verify_routing(g, d, t, eta * 2.0)));
    MultiGraph bigger = g;
    bigger.add_edge(0, n - 1);
    CHECK(std::holds_alternative<RoutingWitness>(verify_routing(bigger, d, t, eta)));
  }
}

TEST_CASE("LP optimum agrees with discretized exhaustive search") {
  Rng rng(808);
  int done = 0;
  for (int i = 0; done < 30 && i < 200; ++i) {
    int n = 4 + static_cast<int>(rng.below(4));
    MultiGraph g(n);
    for (int v = 1; v < n; ++v) g.add_edge(static_cast<int>(rng.below(static_cast<std::uint64_t>(v))), v);
    int extras = static_cast<int>(rng.below(4));
    for (int e = 0; e < extras; ++e) {
      int u = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      int w = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      if (u != w && g.multiplicity(u, w) == 0) g.add_edge(u, w);
    }
    Demand d;
    int pairs = 1 + static_cast<int>(rng.below(2));
    for (int p = 0; p < pairs; ++p) {
      int u = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      int w = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      if (u != w) d.add(u, w, static_cast<double>(1 + rng.below(4)) / 8.0);
    }
    if (d.empty()) continue;
    const int t = 3;
    auto brute = brute_min_congestion(g, d, t);
    auto lp = route_demand_exact(g, d, t);
    if (!brute.has_value()) {
      CHECK(std::holds_alternative<RoutingInfeasible>(lp));
      ++done;
      continue;
    }
    REQUIRE(std::holds_alternative<RouteValue>(lp));
    double lp_min = std::get<RouteValue>(lp).congestion;
    CHECK(lp_min <= *brute + 1e-9);
    CHECK(std::holds_alternative<RoutingWitness>(verify_routing(g, d, t, *brute + 1e-9)));
    if (lp_min - 0.125 > 1e-6)
      CHECK(std::holds_alternative<RoutingInfeasible>(verify_routing(g, d, t, lp_min - 0.125)));
    ++done;
  }
  CHECK(done == 30);
}
