#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hopex/errors.hpp"
#include "hopex/multigraph.hpp"
#include "hopex/rational.hpp"

namespace hopex {

/**
 * One clustering: disjoint vertex sets ("clusters") with a certified weak
 * diameter bound per cluster and a pairwise separation bound between clusters.
 */
struct Clustering {
  std::vector<std::vector<int>> clusters;
};

/** A family of clusterings that together cover every vertex. */
struct WellSeparatedClustering {
  int n = 0;
  int h_sep = 1;
  int h_diam = 1;
  std::vector<Clustering> clusterings;

  int width() const { return static_cast<int>(clusterings.size()); }

  // Max number of clusterings a single vertex appears in.
  int load() const {
    std::vector<int> count(static_cast<std::size_t>(n), 0);
    for (const auto& clustering : clusterings)
      for (const auto& cluster : clustering.clusters)
        for (int v : cluster) ++count[static_cast<std::size_t>(v)];
    int worst = 0;
    for (int c : count) worst = std::max(worst, c);
    return worst;
  }

  long long vertex_count(std::size_t clustering_index) const {
    long long total = 0;
    for (const auto& cluster : clusterings[clustering_index].clusters)
      total += static_cast<long long>(cluster.size());
    return total;
  }
};

/**
 * Output of the clustering decomposition: g groups of exactly k equal-size
 * blocks each.  Blocks inside a group inherit the separation bound of the
 * source clustering; `dropped` lists the vertices in no block.
 */
struct Grouping {
  int n = 0;
  int k = 0;
  int separation_bound = 0;
  long long block_size = 0;
  std::vector<std::vector<std::vector<int>>> groups;  // groups[j] = k blocks
  std::vector<int> dropped;

  int group_count() const { return static_cast<int>(groups.size()); }

  // Max number of blocks a vertex appears in (over all groups).
  int load() const {
    std::map<int, int> count;
    int worst = 0;
    for (const auto& group : groups)
      for (const auto& block : group)
        for (int v : block) worst = std::max(worst, ++count[v]);
    return worst;
  }
};

/**
 * Greedy ball-carving construction of a well-separated clustering cover.
 *
 * Rounds of carving: pick the lowest-index vertex not yet covered by any
 * previous clustering and still eligible in the current one, carve the ball of
 * radius (h_diam - h_sep)/2 around it (restricted to eligible vertices), and
 * mark the ball of radius 2r + h_sep - 1 ineligible so the next center is far
 * enough that carved clusters stay h_sep apart.  When no eligible uncovered
 * vertex remains, start a new clustering.  Throws CoverInfeasible if more than
 * load_max clusterings would be needed; raising h_diam lets clusters grow and
 * brings the count down.
 */
inline WellSeparatedClustering build_cover(const MultiGraph& g, int h_sep, int h_diam,
                                           int load_max) {
  if (h_sep < 1 || h_diam < h_sep)
    throw PreconditionViolated("cover needs h_diam >= h_sep >= 1");
  if (load_max < 1) throw PreconditionViolated("cover needs load_max >= 1");

  WellSeparatedClustering cover;
  cover.n = g.n();
  cover.h_sep = h_sep;
  cover.h_diam = h_diam;

  const int radius = (h_diam - h_sep) / 2;
  const int guard = 2 * radius + h_sep - 1;
  std::vector<char> covered(static_cast<std::size_t>(g.n()), 0);
  long long covered_count = 0;

  while (covered_count < g.n()) {
    if (cover.width() >= load_max)
      throw CoverInfeasible("cover needs more than " + std::to_string(load_max) +
                            " clusterings at h_diam=" + std::to_string(h_diam));
    Clustering clustering;
    std::vector<char> eligible(static_cast<std::size_t>(g.n()), 1);
    while (true) {
      int center = -1;
      for (int v = 0; v < g.n(); ++v)
        if (!covered[static_cast<std::size_t>(v)] && eligible[static_cast<std::size_t>(v)]) {
          center = v;
          break;
        }
      if (center < 0) break;
      std::vector<int> cluster;
      for (int v : ball(g, center, radius))
        if (eligible[static_cast<std::size_t>(v)]) cluster.push_back(v);
      for (int v : cluster) {
        if (!covered[static_cast<std::size_t>(v)]) {
          covered[static_cast<std::size_t>(v)] = 1;
          ++covered_count;
        }
      }
      for (int v : ball(g, center, guard)) eligible[static_cast<std::size_t>(v)] = 0;
      clustering.clusters.push_back(std::move(cluster));
    }
    cover.clusterings.push_back(std::move(clustering));
  }
  return cover;
}

// Largest cluster across all clusterings; ties resolved by (clustering index,
// cluster index).
struct LargestCluster {
  std::size_t clustering_index = 0;
  std::size_t cluster_index = 0;
  std::vector<int> cluster;
};

inline std::optional<LargestCluster> largest_cluster(const WellSeparatedClustering& cover) {
  std::optional<LargestCluster> best;
  for (std::size_t ci = 0; ci < cover.clusterings.size(); ++ci) {
    const auto& clusters = cover.clusterings[ci].clusters;
    for (std::size_t cj = 0; cj < clusters.size(); ++cj) {
      if (!best || clusters[cj].size() > best->cluster.size()) {
        best = LargestCluster{ci, cj, clusters[cj]};
      }
    }
  }
  return best;
}

/**
 * Clustering decomposition: turn a width-w cover into few groups of exactly k
 * equal-size blocks.
 *
 *   1. drop clusterings with fewer than c*n/w vertices;
 *   2. split the rest greedily (clusters intact) into pieces of >= c*n/w
 *      vertices; each piece becomes one group, the leftover is dropped;
 *   3. inside each group, concatenate clusters into blocks, closing a block
 *      once it reaches c*n/(w*k) - n/k' vertices; blocks beyond the k-th are
 *      dropped;
 *   4. trim every block to exactly ceil(c*n/(w*k) - n/k') vertices, keeping
 *      the lexicographically smallest ones.
 *
 * All thresholds are evaluated in exact rational arithmetic.  Requires every
 * cluster to have at most n/k' vertices and k' >= w*k/(c*(1-c')); violated
 * preconditions throw, while an input whose clusterings are all too small
 * yields an empty grouping (callers treat that as an all-leakage step).
 */
inline Grouping decompose_clustering(const WellSeparatedClustering& cover, Rational c,
                                     Rational c_prime, int k, long long k_prime) {
  const long long n = cover.n;
  const int w = cover.width();
  if (!(Rational(0) < c && c < Rational(1)) || !(Rational(0) < c_prime && c_prime < Rational(1)))
    throw PreconditionViolated("decomposition needs c, c' in (0,1)");
  if (k < 1 || k_prime < 1 || w < 1)
    throw PreconditionViolated("decomposition needs k, k', w >= 1");
  for (const auto& clustering : cover.clusterings)
    for (const auto& cluster : clustering.clusters)
      if (static_cast<long long>(cluster.size()) * k_prime > n)
        throw PreconditionViolated("cluster of size " + std::to_string(cluster.size()) +
                                   " exceeds n/k' = " + std::to_string(n) + "/" +
                                   std::to_string(k_prime));
  // k' >= w*k/(c*(1-c'))  <=>  k' * c * (1-c') >= w*k
  Rational one(1);
  if (Rational(k_prime) * c * (one - c_prime) < Rational(static_cast<long long>(w) * k))
    throw PreconditionViolated("k' = " + std::to_string(k_prime) +
                               " below w*k/(c*(1-c'))");

  Grouping grouping;
  grouping.n = cover.n;
  grouping.k = k;
  grouping.separation_bound = cover.h_sep;

  // Piece threshold c*n/w and block threshold c*n/(w*k) - n/k', kept exact:
  // size >= c*n/w        <=>  size * w * c.den >= c.num * n
  // size >= cn/(wk)-n/k' <=>  size * w*k*k'*c.den >= c.num*n*k' - c.den*n*w*k
  auto piece_big_enough = [&](long long size) {
    return static_cast<__int128>(size) * w * c.den >= static_cast<__int128>(c.num) * n;
  };
  const __int128 block_num =
      static_cast<__int128>(c.num) * n * k_prime - static_cast<__int128>(c.den) * n * w * k;
  const __int128 block_den = static_cast<__int128>(c.den) * w * k * k_prime;
  auto block_big_enough = [&](long long size) {
    return static_cast<__int128>(size) * block_den >= block_num;
  };
  // block_size = ceil(block_num / block_den); preconditions make it >= 1.
  __int128 q = block_num / block_den;
  if (block_num % block_den != 0 && block_num > 0) ++q;
  grouping.block_size = static_cast<long long>(q);
  if (grouping.block_size < 1)
    throw PreconditionViolated("derived block size below 1; k' too small for w, k, c");

  std::vector<char> in_block(static_cast<std::size_t>(cover.n), 0);

  for (const auto& clustering : cover.clusterings) {
    long long total = 0;
    for (const auto& cluster : clustering.clusters)
      total += static_cast<long long>(cluster.size());
    if (!piece_big_enough(total)) continue;  // step 1: clustering dropped

    // Step 2: greedy split into pieces of >= c*n/w vertices.
    std::vector<std::vector<const std::vector<int>*>> pieces;
    std::vector<const std::vector<int>*> piece;
    long long piece_size = 0;
    for (const auto& cluster : clustering.clusters) {
      piece.push_back(&cluster);
      piece_size += static_cast<long long>(cluster.size());
      if (piece_big_enough(piece_size)) {
        pieces.push_back(std::move(piece));
        piece.clear();
        piece_size = 0;
      }
    }
    // Leftover piece below the threshold is dropped (not merged back).

    // Step 3 + 4: blocks per piece.
    for (const auto& group_clusters : pieces) {
      std::vector<std::vector<int>> blocks;
      std::vector<int> block;
      for (const auto* cluster : group_clusters) {
        if (static_cast<int>(blocks.size()) == k) break;
        block.insert(block.end(), cluster->begin(), cluster->end());
        if (block_big_enough(static_cast<long long>(block.size()))) {
          std::sort(block.begin(), block.end());
          block.resize(static_cast<std::size_t>(grouping.block_size));  // keep smallest
          blocks.push_back(std::move(block));
          block.clear();
        }
      }
      if (static_cast<int>(blocks.size()) < k)
        throw Error("grouping could not form k blocks; preconditions should prevent this");
      for (const auto& b : blocks)
        for (int v : b) in_block[static_cast<std::size_t>(v)] = 1;
      grouping.groups.push_back(std::move(blocks));
    }
  }

  for (int v = 0; v < cover.n; ++v)
    if (!in_block[static_cast<std::size_t>(v)]) grouping.dropped.push_back(v);
  return grouping;
}

// ---- re-validation ----------------------------------------------------------

// Check diameter, separation, and coverage of a cover against its host graph;
// returns a human-readable violation or nullopt.
inline std::optional<std::string> validate_cover(const MultiGraph& g,
                                                 const WellSeparatedClustering& cover) {
  if (cover.n != g.n()) return "cover/graph vertex count mismatch";
  std::vector<char> covered(static_cast<std::size_t>(g.n()), 0);
  for (std::size_t ci = 0; ci < cover.clusterings.size(); ++ci) {
    const auto& clusters = cover.clusterings[ci].clusters;
    std::set<int> seen;
    for (const auto& cluster : clusters) {
      if (cluster.empty()) return "empty cluster";
      for (int v : cluster) {
        if (v < 0 || v >= g.n()) return "cluster vertex out of range";
        if (!seen.insert(v).second) return "clusters overlap within a clustering";
        covered[static_cast<std::size_t>(v)] = 1;
      }
      auto diam = weak_diameter(g, cluster);
      if (!diam || *diam > cover.h_diam) return "cluster exceeds diameter bound";
    }
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      // Pairwise separation via one BFS per cluster-a vertex set.
      std::vector<int> best(static_cast<std::size_t>(g.n()), -1);
      {
        std::deque<int> queue;
        for (int v : clusters[a]) {
          best[static_cast<std::size_t>(v)] = 0;
          queue.push_back(v);
        }
        while (!queue.empty()) {
          int v = queue.front();
          queue.pop_front();
          for (int u : g.neighbors(v))
            if (best[static_cast<std::size_t>(u)] < 0) {
              best[static_cast<std::size_t>(u)] = best[static_cast<std::size_t>(v)] + 1;
              queue.push_back(u);
            }
        }
      }
      for (std::size_t b = a + 1; b < clusters.size(); ++b)
        for (int v : clusters[b]) {
          int d = best[static_cast<std::size_t>(v)];
          if (d >= 0 && d < cover.h_sep) return "clusters closer than the separation bound";
        }
    }
  }
  for (int v = 0; v < g.n(); ++v)
    if (!covered[static_cast<std::size_t>(v)]) return "vertex " + std::to_string(v) + " uncovered";
  return std::nullopt;
}

// Check block sizes, block-count, disjointness, and separation of a grouping
// against the host graph.
inline std::optional<std::string> validate_grouping(const MultiGraph& g, const Grouping& grouping) {
  for (const auto& group : grouping.groups) {
    if (static_cast<int>(group.size()) != grouping.k) return "group without exactly k blocks";
    std::set<int> seen;
    for (const auto& block : group) {
      if (static_cast<long long>(block.size()) != grouping.block_size)
        return "block size differs from the declared block size";
      for (int v : block)
        if (v < 0 || v >= g.n() || !seen.insert(v).second)
          return "blocks overlap within a group or leave the vertex range";
    }
    for (std::size_t a = 0; a < group.size(); ++a)
      for (std::size_t b = a + 1; b < group.size(); ++b)
        for (int u : group[a])
          for (int v : group[b]) {
            auto d = dist(g, u, v);
            if (d && *d < grouping.separation_bound)
              return "blocks closer than the separation bound";
          }
  }
  return std::nullopt;
}

// ---- JSON serialization ------------------------------------------------------

inline nlohmann::json to_json(const WellSeparatedClustering& cover) {
  nlohmann::json j;
  j["n"] = cover.n;
  j["h_sep"] = cover.h_sep;
  j["h_diam"] = cover.h_diam;
  j["width"] = cover.width();
  j["load"] = cover.load();
  j["clusterings"] = nlohmann::json::array();
  for (const auto& clustering : cover.clusterings) j["clusterings"].push_back(clustering.clusters);
  return j;
}

inline WellSeparatedClustering cover_from_json(const nlohmann::json& j) {
  WellSeparatedClustering cover;
  cover.n = j.at("n").get<int>();
  cover.h_sep = j.at("h_sep").get<int>();
  cover.h_diam = j.at("h_diam").get<int>();
  for (const auto& clusters : j.at("clusterings")) {
    Clustering clustering;
    clustering.clusters = clusters.get<std::vector<std::vector<int>>>();
    cover.clusterings.push_back(std::move(clustering));
  }
  return cover;
}

inline nlohmann::json to_json(const Grouping& grouping) {
  nlohmann::json j;
  j["n"] = grouping.n;
  j["k"] = grouping.k;
  j["separation"] = grouping.separation_bound;
  j["block_size"] = grouping.block_size;
  j["load"] = grouping.load();
  j["groups"] = grouping.groups;
  j["dropped"] = grouping.dropped;
  return j;
}

inline Grouping grouping_from_json(const nlohmann::json& j) {
  Grouping grouping;
  grouping.n = j.at("n").get<int>();
  grouping.k = j.at("k").get<int>();
  grouping.separation_bound = j.at("separation").get<int>();
  grouping.block_size = j.at("block_size").get<long long>();
  grouping.groups = j.at("groups").get<std::vector<std::vector<std::vector<int>>>>();
  grouping.dropped = j.at("dropped").get<std::vector<int>>();
  return grouping;
}

}  // namespace hopex
