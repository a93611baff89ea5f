#include <catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <vector>

#include "hopex/clustering.hpp"
#include "hopex/rational.hpp"
#include "hopex/rng.hpp"

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

// Synthetic covers on an edgeless host graph: distinct clusters are
// infinitely separated, so any h_sep is satisfied and the combinatorial
// decomposition is isolated from geometry.
//
// The disjoint variant puts every vertex in exactly one cluster overall
// (load 1), so the clusterings jointly hold n vertices.  That is the regime
// in which the g <= w/c group-count bound is provable: the greedy split
// closes pieces at c*n/w vertices, and n total vertices fund at most w/c of
// them.  Overlapping covers fund up to load * w/c pieces instead, which the
// load-scaled test below checks separately.
WellSeparatedClustering disjoint_cover(Rng& rng, int n, int width, int max_cluster) {
  WellSeparatedClustering cover;
  cover.n = n;
  cover.h_sep = 4;
  cover.h_diam = 4;
  std::vector<std::vector<int>> members(static_cast<std::size_t>(width));
  for (int v = 0; v < n; ++v)
    members[rng.below(static_cast<std::uint64_t>(width))].push_back(v);
  for (auto& order : members) {
    Clustering clustering;
    rng.shuffle(order);
    std::size_t at = 0;
    while (at < order.size()) {
      std::size_t len = std::min<std::size_t>(1 + rng.below(static_cast<std::uint64_t>(max_cluster)),
                                              order.size() - at);
      std::vector<int> cluster(order.begin() + static_cast<long>(at),
                               order.begin() + static_cast<long>(at + len));
      std::sort(cluster.begin(), cluster.end());
      clustering.clusters.push_back(std::move(cluster));
      at += len;
    }
    cover.clusterings.push_back(std::move(clustering));
  }
  return cover;
}

WellSeparatedClustering overlapping_cover(Rng& rng, int n, int width, int max_cluster) {
  WellSeparatedClustering cover;
  cover.n = n;
  cover.h_sep = 4;
  cover.h_diam = 4;
  for (int c = 0; c < width; ++c) {
    Clustering clustering;
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) order[static_cast<std::size_t>(v)] = v;
    rng.shuffle(order);
    // The first clustering covers everything; later ones take a prefix.
    std::size_t take = c == 0 ? order.size()
                              : order.size() / 2 + rng.below(order.size() / 2);
    std::size_t at = 0;
    while (at < take) {
      std::size_t len = std::min<std::size_t>(1 + rng.below(static_cast<std::uint64_t>(max_cluster)),
                                              take - at);
      std::vector<int> cluster(order.begin() + static_cast<long>(at),
                               order.begin() + static_cast<long>(at + len));
      std::sort(cluster.begin(), cluster.end());
      clustering.clusters.push_back(std::move(cluster));
      at += len;
    }
    cover.clusterings.push_back(std::move(clustering));
  }
  return cover;
}

}  // namespace

TEST_CASE("covering a single vertex") {
  MultiGraph g(1);
  auto cover = build_cover(g, 2, 4, 10);
  CHECK(cover.width() == 1);
  CHECK(cover.load() == 1);
  REQUIRE(cover.clusterings.size() == 1);
  REQUIRE(cover.clusterings[0].clusters.size() == 1);
  CHECK(cover.clusterings[0].clusters[0] == std::vector<int>{0});
  CHECK_FALSE(validate_cover(g, cover).has_value());
}

TEST_CASE("complete graphs collapse to one cluster") {
  auto g = complete_graph(6);
  auto cover = build_cover(g, 2, 4, 10);
  REQUIRE(cover.width() == 1);
  REQUIRE(cover.clusterings[0].clusters.size() == 1);
  CHECK(cover.clusterings[0].clusters[0].size() == 6);
  CHECK_FALSE(validate_cover(g, cover).has_value());
}

TEST_CASE("path cover at tight parameters stays narrow") {
  auto g = path_graph(9);
  auto cover = build_cover(g, 2, 2, 10);
  CHECK(cover.width() <= 3);
  CHECK_FALSE(validate_cover(g, cover).has_value());

  // Every vertex appears somewhere.
  std::set<int> seen;
  for (const auto& clustering : cover.clusterings)
    for (const auto& cluster : clustering.clusters) seen.insert(cluster.begin(), cluster.end());
  CHECK(seen.size() == 9);
}

TEST_CASE("cover construction respects the load cap") {
  auto g = path_graph(9);
  CHECK_THROWS_AS(build_cover(g, 2, 2, 1), CoverInfeasible);
}

TEST_CASE("cover parameters are validated") {
  MultiGraph g(3);
  CHECK_THROWS_AS(build_cover(g, 2, 1, 10), PreconditionViolated);
  CHECK_THROWS_AS(build_cover(g, 0, 1, 10), PreconditionViolated);
}

TEST_CASE("validate_cover reports broken invariants") {
  auto g = path_graph(6);
  WellSeparatedClustering cover;
  cover.n = 6;
  cover.h_sep = 2;
  cover.h_diam = 1;
  Clustering clustering;
  clustering.clusters.push_back({0, 1, 2});  // weak diameter 2 > 1
  clustering.clusters.push_back({3, 4, 5});
  cover.clusterings.push_back(clustering);
  auto violation = validate_cover(g, cover);
  REQUIRE(violation.has_value());

  cover.h_diam = 2;  // now the diameters fit, but the clusters touch
  auto separation = validate_cover(g, cover);
  REQUIRE(separation.has_value());

  cover.clusterings[0].clusters = {{0, 1, 2}};  // vertex 3 uncovered
  auto coverage = validate_cover(g, cover);
  REQUIRE(coverage.has_value());
}

TEST_CASE("largest cluster scans in index order") {
  WellSeparatedClustering cover;
  cover.n = 3;
  cover.h_sep = 1;
  cover.h_diam = 1;
  Clustering a;
  a.clusters = {{0}, {1, 2}};
  cover.clusterings.push_back(a);
  auto big = largest_cluster(cover);
  REQUIRE(big.has_value());
  CHECK(big->cluster == std::vector<int>{1, 2});
  CHECK(big->clustering_index == 0);
  CHECK(big->cluster_index == 1);

  Clustering b;
  b.clusters = {{0}, {1}, {2}};
  WellSeparatedClustering singletons;
  singletons.n = 3;
  singletons.clusterings.push_back(b);
  auto first = largest_cluster(singletons);
  REQUIRE(first.has_value());
  CHECK(first->cluster == std::vector<int>{0});

  Rng rng(42);
  auto random_cover = overlapping_cover(rng, 50, 3, 4);
  auto found = largest_cluster(random_cover);
  std::size_t best = 0;
  for (const auto& clustering : random_cover.clusterings)
    for (const auto& cluster : clustering.clusters) best = std::max(best, cluster.size());
  REQUIRE(found.has_value());
  CHECK(found->cluster.size() == best);
}

TEST_CASE("decomposing eight singletons") {
  // One clustering of 8 singleton clusters on an edgeless host.  With
  // c = c' = 1/2, k = 2, k' = 8: pieces close at c*n/w = 4 vertices, so two
  // groups form; blocks close at ceil(c*n/(w*k) - n/k') = ceil(2 - 1) = 1.
  MultiGraph g(8);
  WellSeparatedClustering cover;
  cover.n = 8;
  cover.h_sep = 3;
  cover.h_diam = 1;
  Clustering clustering;
  for (int v = 0; v < 8; ++v) clustering.clusters.push_back({v});
  cover.clusterings.push_back(clustering);

  auto grouping = decompose_clustering(cover, Rational(1, 2), Rational(1, 2), 2, 8);
  CHECK(grouping.block_size == 1);
  CHECK(grouping.group_count() == 2);
  for (const auto& group : grouping.groups) {
    REQUIRE(group.size() == 2);
    for (const auto& block : group) CHECK(block.size() == 1);
  }
  CHECK(grouping.load() <= cover.load());
  CHECK_FALSE(validate_grouping(g, grouping).has_value());

  // g <= w/c = 2 groups; dropped vertices obey the stated fraction.
  CHECK(grouping.group_count() <= 2);
  CHECK(grouping.dropped.size() == 4);
}

TEST_CASE("decomposition preconditions are enforced") {
  MultiGraph g(8);
  WellSeparatedClustering cover;
  cover.n = 8;
  cover.h_sep = 3;
  cover.h_diam = 1;
  Clustering clustering;
  for (int v = 0; v < 8; ++v) clustering.clusters.push_back({v});
  cover.clusterings.push_back(clustering);

  // k' = 32 makes every cluster oversized: |S| = 1 > n/k' = 1/4.
  CHECK_THROWS_AS(decompose_clustering(cover, Rational(1, 2), Rational(1, 2), 2, 32),
                  PreconditionViolated);
  // k' below w*k/(c*(1-c')) = 8 violates the size inequality.
  CHECK_THROWS_AS(decompose_clustering(cover, Rational(1, 2), Rational(1, 2), 2, 7),
                  PreconditionViolated);
  CHECK_THROWS_AS(decompose_clustering(cover, Rational(3, 2), Rational(1, 2), 2, 8),
                  PreconditionViolated);
  CHECK_THROWS_AS(decompose_clustering(cover, Rational(1, 2), Rational(1, 1), 2, 8),
                  PreconditionViolated);
}

TEST_CASE("starved clusterings yield the empty grouping") {
  // Both clusterings sit below the c*n/w = 4 threshold, so everything is
  // dropped and the grouping is empty rather than an error.  k' = 16 keeps
  // the preconditions intact: singleton clusters fit n/k' = 1 and
  // k' >= w*k/(c*(1-c')) = 16.
  MultiGraph g(16);
  WellSeparatedClustering cover;
  cover.n = 16;
  cover.h_sep = 3;
  cover.h_diam = 1;
  for (int c = 0; c < 2; ++c) {
    Clustering clustering;
    clustering.clusters.push_back({c});  // one vertex each; far below 16/4
    cover.clusterings.push_back(clustering);
  }
  auto grouping = decompose_clustering(cover, Rational(1, 2), Rational(1, 2), 2, 16);
  CHECK(grouping.groups.empty());
  CHECK(grouping.dropped.size() == 16);
}

TEST_CASE("random disjoint covers decompose within the stated bounds") {
  Rng rng(515);
  for (int i = 0; i < 50; ++i) {
    int k = 2 + static_cast<int>(rng.below(3));
    int width = 1 + static_cast<int>(rng.below(3));
    Rational c = rng.below(2) == 0 ? Rational(1, 2) : Rational(1, 4);
    Rational c_prime(1, 2);
    int max_cluster = 1 + static_cast<int>(rng.below(2));
    // k' = w*k/(c*(1-c')) exactly (c has numerator 1 and c' = 1/2 here),
    // and n large enough that clusters of size <= max_cluster fit n/k'.
    long long k_prime = 2LL * width * k * c.den;
    int n = static_cast<int>(k_prime) * max_cluster * 2 +
            static_cast<int>(rng.below(40));
    MultiGraph g(n);
    auto cover = disjoint_cover(rng, n, width, max_cluster);

    auto grouping = decompose_clustering(cover, c, c_prime, k, k_prime);

    // Exact block size: ceil(c*n/(w*k) - n/k').
    Rational target = Rational(static_cast<long long>(n) * c.num,
                               static_cast<long long>(cover.width()) * k * c.den) -
                      Rational(n, k_prime);
    long long expected = ceil_div(target.num, target.den);
    if (!grouping.groups.empty()) {
      CHECK(grouping.block_size == expected);
      for (const auto& group : grouping.groups) {
        REQUIRE(static_cast<int>(group.size()) == k);
        for (const auto& block : group)
          CHECK(static_cast<long long>(block.size()) == grouping.block_size);
      }
    }

    // g <= w/c, exactly, in integer arithmetic.
    CHECK(static_cast<long long>(grouping.group_count()) * c.num <=
          static_cast<long long>(cover.width()) * c.den);
    CHECK(grouping.load() <= cover.load());

    // Dropped bound: (2c + 1/(c'k') + load*w*k/(c*k')) * n, as an exact
    // rational comparison; 1/(c'k') = 2/k' with c' = 1/2.
    Rational dropped_bound =
        Rational(2 * c.num, c.den) + Rational(2, k_prime) +
        Rational(static_cast<long long>(grouping.load()) * cover.width() * k, 1) *
            Rational(c.den, c.num) * Rational(1, k_prime);
    Rational dropped(static_cast<long long>(grouping.dropped.size()), n);
    CHECK(dropped <= dropped_bound);

    // Blocks are disjoint within every group, and the host-graph separation
    // holds (vacuously infinite on the edgeless host).
    CHECK_FALSE(validate_grouping(g, grouping).has_value());
  }
}

TEST_CASE("overlapping covers obey the load-scaled group bound") {
  // When vertices repeat across clusterings, the clusterings jointly hold up
  // to load * n vertices, and the greedy split can close up to load * w/c
  // pieces.  Block size, load, and the dropped fraction keep their exact
  // bounds.
  Rng rng(616);
  for (int i = 0; i < 50; ++i) {
    int k = 2 + static_cast<int>(rng.below(3));
    int width = 1 + static_cast<int>(rng.below(3));
    Rational c = rng.below(2) == 0 ? Rational(1, 2) : Rational(1, 4);
    int max_cluster = 1 + static_cast<int>(rng.below(2));
    long long k_prime = 2LL * width * k * c.den;
    int n = static_cast<int>(k_prime) * max_cluster * 2 +
            static_cast<int>(rng.below(40));
    MultiGraph g(n);
    auto cover = overlapping_cover(rng, n, width, max_cluster);

    auto grouping = decompose_clustering(cover, c, Rational(1, 2), k, k_prime);

    Rational target = Rational(static_cast<long long>(n) * c.num,
                               static_cast<long long>(cover.width()) * k * c.den) -
                      Rational(n, k_prime);
    if (!grouping.groups.empty())
      CHECK(grouping.block_size == ceil_div(target.num, target.den));

    CHECK(static_cast<long long>(grouping.group_count()) * c.num <=
          static_cast<long long>(cover.load()) * cover.width() * c.den);
    CHECK(grouping.load() <= cover.load());

    Rational dropped_bound =
        Rational(2 * c.num, c.den) + Rational(2, k_prime) +
        Rational(static_cast<long long>(grouping.load()) * cover.width() * k, 1) *
            Rational(c.den, c.num) * Rational(1, k_prime);
    CHECK(Rational(static_cast<long long>(grouping.dropped.size()), n) <= dropped_bound);
    CHECK_FALSE(validate_grouping(g, grouping).has_value());
  }
}

TEST_CASE("cover and grouping serialize to JSON and back") {
  auto g = path_graph(9);
  auto cover = build_cover(g, 2, 2, 10);
  auto j = to_json(cover);
  auto back = cover_from_json(j);
  CHECK(back.n == cover.n);
  CHECK(back.width() == cover.width());
  CHECK(back.clusterings[0].clusters == cover.clusterings[0].clusters);

  MultiGraph host(8);
  WellSeparatedClustering synthetic;
  synthetic.n = 8;
  synthetic.h_sep = 3;
  synthetic.h_diam = 1;
  Clustering clustering;
  for (int v = 0; v < 8; ++v) clustering.clusters.push_back({v});
  synthetic.clusterings.push_back(clustering);
  auto grouping = decompose_clustering(synthetic, Rational(1, 2), Rational(1, 2), 2, 8);
  auto gj = to_json(grouping);
  auto gback = grouping_from_json(gj);
  CHECK(gback.groups == grouping.groups);
  CHECK(gback.block_size == grouping.block_size);
  CHECK(gback.dropped == grouping.dropped);
}
