#include <catch_amalgamated.hpp>

#include <algorithm>
#include <variant>

#include "hopex/expander_decomp.hpp"
#include "hopex/routing.hpp"

using namespace hopex;

namespace {

MultiGraph complete_graph(int n) {
  MultiGraph g(n);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) g.add_edge(u, v);
  return g;
}

// Two K_5 cliques joined by the single bridge {4,5}.
MultiGraph barbell() {
  MultiGraph g(10);
  for (int u = 0; u < 5; ++u)
    for (int v = u + 1; v < 5; ++v) g.add_edge(u, v);
  for (int u = 5; u < 10; ++u)
    for (int v = u + 1; v < 10; ++v) g.add_edge(u, v);
  g.add_edge(4, 5);
  return g;
}

}  // namespace

TEST_CASE("parameter derivations") {
  DecompositionParams p;
  p.h = 3;
  p.s = 2.0;
  p.phi = 0.25;
  p.kappa = 1.0;
  CHECK(p.verify_hops() == 6);
  CHECK(p.congestion_bound() == Catch::Approx(4.0));
  CHECK(p.budget(10) == 15);  // floor(3 * 2 * 1 * 0.25 * 10)
  p.phi = 1e-5;
  CHECK(p.budget(128) == 0);
}

TEST_CASE("complete graphs certify without cutting") {
  DecompositionParams p;
  p.h = 2;
  p.s = 2.0;
  p.phi = 0.01;
  p.kappa = 1.0;
  auto result = decompose_expander(complete_graph(8), p, 1);
  CHECK(result.cut.empty());
  CHECK(result.rounds == 1);
  CHECK(result.demands_checked > 0);
}

TEST_CASE("edgeless graphs certify vacuously") {
  DecompositionParams p;
  p.h = 2;
  p.s = 1.0;
  p.phi = 0.5;
  p.kappa = 1.0;
  auto result = decompose_expander(MultiGraph(6), p, 1);
  CHECK(result.cut.empty());
}

TEST_CASE("the barbell bridge is cut") {
  DecompositionParams p;
  p.h = 3;
  p.s = 2.0;
  p.phi = 0.25;  // congestion bound 4 < 5 cross pairs
  p.kappa = 1.0;
  auto g = barbell();

  // Matching the cliques across the bridge is infeasible before the cut:
  // five unit pairs share one edge.
  Demand cross;
  for (int v = 0; v < 5; ++v) cross.add(v, v + 5, 1.0);
  auto pre = route_demand_exact(g, cross, p.verify_hops());
  REQUIRE(std::holds_alternative<RouteValue>(pre));
  CHECK(std::get<RouteValue>(pre).congestion == Catch::Approx(5.0).margin(1e-6));

  auto result = decompose_expander(g, p, 7);
  REQUIRE(result.cut.size() == 1);
  CHECK(ordered_pair(result.cut[0].first, result.cut[0].second) == VertexPair{4, 5});
  CHECK(static_cast<long long>(result.cut.size()) <= p.budget(g.n()));

  // After the cut the cliques are independent and all close pairs route.
  auto rest = subtract(g, result.cut);
  Demand intra;
  intra.add(0, 1, 1.0);
  intra.add(2, 3, 1.0);
  intra.add(5, 6, 1.0);
  CHECK(std::holds_alternative<RoutingWitness>(
      verify_routing(rest, intra, p.verify_hops(), p.congestion_bound())));

  // Monotonicity: a second pass finds nothing left to cut.
  auto again = decompose_expander(rest, p, 7);
  CHECK(again.cut.empty());

  // Fresh seeds agree on the certified graph.
  for (std::uint64_t seed = 100; seed < 105; ++seed)
    CHECK(decompose_expander(rest, p, seed).cut.empty());
}

TEST_CASE("identical seeds reproduce the decomposition") {
  DecompositionParams p;
  p.h = 3;
  p.s = 2.0;
  p.phi = 0.25;
  p.kappa = 1.0;
  auto a = decompose_expander(barbell(), p, 13);
  auto b = decompose_expander(barbell(), p, 13);
  CHECK(a.cut == b.cut);
  CHECK(a.rounds == b.rounds);
  CHECK(a.demands_checked == b.demands_checked);
}

TEST_CASE("budget exhaustion is reported") {
  // K_8 at hop bound 1: every matched pair must use its direct edge at
  // congestion 1, above the allowed 1/1.1.  Each round cuts one edge, the
  // next matching fails again, and the floor(1*1*1*1.1*8) = 8 cut budget
  // runs out long before the 28 edges do.
  DecompositionParams p;
  p.h = 1;
  p.s = 1.0;
  p.phi = 1.1;
  p.kappa = 1.0;
  CHECK_THROWS_AS(decompose_expander(complete_graph(8), p, 3), BudgetExhausted);
}

TEST_CASE("sampled matching demands are h-hop unit demands") {
  auto g = barbell();
  Rng rng(77);
  for (int i = 0; i < 20; ++i) {
    auto d = decomp_detail::matching_demand(g, 3, rng);
    CHECK(d.is_unit());
    CHECK(d.is_h_hop(g, 3));
  }
}
