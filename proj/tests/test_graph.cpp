#include <catch_amalgamated.hpp>

#include <sstream>

#include "hopex/multigraph.hpp"

using namespace hopex;

namespace {

MultiGraph path_graph(int n) {
  MultiGraph g(n);
  for (int v = 0; v + 1 < n; ++v) g.add_edge(v, v + 1);
  return g;
}

MultiGraph complete_graph(int n) {
  MultiGraph g(n);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) g.add_edge(u, v);
  return g;
}

MultiGraph cycle_graph(int n) {
  MultiGraph g(n);
  for (int v = 0; v < n; ++v) g.add_edge(v, (v + 1) % n);
  return g;
}

}  // namespace

TEST_CASE("multigraph bookkeeping") {
  MultiGraph g(4);
  g.add_edge(0, 1);
  g.add_edge(1, 0, 2);  // parallel copies accumulate
  g.add_edge(2, 3);
  CHECK(g.n() == 4);
  CHECK(g.num_edges() == 4);
  CHECK(g.multiplicity(0, 1) == 3);
  CHECK(g.multiplicity(1, 0) == 3);
  CHECK(g.degree(0) == 3);
  CHECK(g.distinct_degree(0) == 1);
  CHECK(g.max_degree() == 3);

  g.remove_edge(0, 1);
  CHECK(g.multiplicity(0, 1) == 2);
  g.remove_edge(0, 1, 2);
  CHECK(g.multiplicity(0, 1) == 0);
  CHECK(g.num_edges() == 1);

  CHECK_THROWS_AS(g.add_edge(0, 0), PreconditionViolated);
  CHECK_THROWS_AS(g.add_edge(0, 4), PreconditionViolated);
  CHECK_THROWS_AS(g.remove_edge(2, 3, 5), PreconditionViolated);
}

TEST_CASE("bundles lists one row per parallel class") {
  MultiGraph g(3);
  g.add_edge(0, 1, 2);
  g.add_edge(1, 2);
  auto rows = g.bundles();
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::tuple<int, int, long long>{0, 1, 2});
  CHECK(rows[1] == std::tuple<int, int, long long>{1, 2, 1});
}

TEST_CASE("hop distances") {
  auto g = path_graph(3);
  CHECK(dist(g, 0, 2) == 2);
  CHECK(dist(g, 1, 1) == 0);

  MultiGraph two(4);
  two.add_edge(0, 1);
  two.add_edge(2, 3);
  CHECK_FALSE(dist(two, 0, 3).has_value());
}

TEST_CASE("balls and diameters") {
  auto g = path_graph(5);
  CHECK(ball(g, 2, 0) == std::vector<int>{2});
  CHECK(ball(g, 2, 1) == std::vector<int>{1, 2, 3});

  CHECK(diameter(complete_graph(4)) == 1);
  CHECK(diameter(cycle_graph(5)) == 2);
  CHECK(weak_diameter(path_graph(4), {0, 3}) == 3);

  MultiGraph two(2);
  CHECK_FALSE(diameter(two).has_value());
  CHECK(diameter(MultiGraph(1)) == 0);
}

TEST_CASE("weak diameter measures through the host graph") {
  // 4-cycle: the set {0, 2} has no internal edge, but the host graph keeps
  // them at distance 2.
  auto g = cycle_graph(4);
  CHECK(weak_diameter(g, {0, 2}) == 2);
}

TEST_CASE("subtract removes one copy per listed pair") {
  MultiGraph g(3);
  g.add_edge(0, 1, 2);
  g.add_edge(1, 2);
  auto h = subtract(g, {{0, 1}, {1, 2}});
  CHECK(h.multiplicity(0, 1) == 1);
  CHECK(h.multiplicity(1, 2) == 0);
  CHECK(g.multiplicity(0, 1) == 2);  // source untouched
}

TEST_CASE("demand totals and predicates") {
  Demand d;
  d.add(0, 1, 0.5);
  d.add(0, 1, 0.25);  // accumulates on the ordered pair
  d.add(2, 0, 0.25);
  CHECK(d.total() == Catch::Approx(1.0).margin(1e-12));
  CHECK(d.is_unit());

  Demand heavy;
  heavy.add(0, 1, 0.8);
  heavy.add(0, 2, 0.8);  // out-mass at 0 is 1.6
  CHECK_FALSE(heavy.is_unit());

  Demand in_heavy;
  in_heavy.add(1, 0, 0.8);
  in_heavy.add(2, 0, 0.8);  // in-mass at 0 is 1.6
  CHECK_FALSE(in_heavy.is_unit());

  auto g = path_graph(4);
  Demand far;
  far.add(0, 3, 1.0);
  CHECK(far.is_h_hop(g, 3));
  CHECK_FALSE(far.is_h_hop(g, 2));

  CHECK_THROWS_AS(d.add(0, 1, -0.5), PreconditionViolated);
}

TEST_CASE("edge list round trip") {
  MultiGraph g(4);
  g.add_edge(0, 1, 2);
  g.add_edge(2, 3);

  std::ostringstream out;
  write_edge_list(out, g);
  std::istringstream in(out.str());
  auto back = parse_edge_list(in);
  CHECK(back.n() == 4);
  CHECK(back.multiplicity(0, 1) == 2);
  CHECK(back.multiplicity(2, 3) == 1);
  CHECK(back.num_edges() == 3);
}

TEST_CASE("edge list parser accepts comments and rejects garbage") {
  std::istringstream in("# a comment\n3 2\n0 1\n# another\n1 2\n");
  auto g = parse_edge_list(in);
  CHECK(g.n() == 3);
  CHECK(g.num_edges() == 2);

  std::istringstream missing("3 2\n0 1\n");
  CHECK_THROWS_AS(parse_edge_list(missing), Error);
  std::istringstream loop("2 1\n1 1\n");
  CHECK_THROWS_AS(parse_edge_list(loop), PreconditionViolated);
}

TEST_CASE("demand and cut file round trips") {
  Demand d;
  d.add(0, 2, 0.5);
  d.add(1, 3, 1.0);
  std::ostringstream out;
  write_demands(out, d);
  std::istringstream in(out.str());
  auto back = parse_demands(in);
  CHECK(back.total() == Catch::Approx(d.total()).margin(1e-12));
  CHECK(back.entries().at({0, 2}) == Catch::Approx(0.5).margin(1e-12));

  std::vector<VertexPair> cut{{0, 1}, {0, 1}, {2, 3}};
  std::ostringstream cut_out;
  write_cut(cut_out, cut);
  std::istringstream cut_in(cut_out.str());
  CHECK(parse_cut(cut_in) == cut);
}
