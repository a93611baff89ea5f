#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hopex/errors.hpp"
#include "hopex/maxflow.hpp"
#include "hopex/multigraph.hpp"
#include "hopex/rng.hpp"

namespace hopex {

struct SparseCut {
  std::vector<int> side;  // one side of the cut, as vertex ids
  double sparsity = 0.0;  // crossing copies over the smaller side's volume
  std::vector<VertexPair> cut_edges;  // one entry per crossing copy
};

struct ExpanderEmbedding {
  int rounds = 0;
  std::vector<std::vector<VertexPair>> matchings;            // one perfect matching per round
  std::vector<std::vector<std::vector<int>>> round_paths;    // embedding path per matched pair
  std::map<VertexPair, long long> edge_use;                  // path steps per bundle, all rounds
  double congestion = 0.0;  // max over bundles of edge_use / multiplicity
};

struct KrvResult {
  std::optional<SparseCut> cut;              // exactly one of the two is set
  std::optional<ExpanderEmbedding> embedding;
  bool padded = false;  // odd input: auxiliary vertex appended, attached to vertex 0
  int aux_vertex = -1;
};

/**
 * A bisection strategy plays the cut side of the reduction: given the round
 * index and the matchings routed so far, it names disjoint halves (A, B) of
 * the vertex set.  Returning nullopt means the strategy has no further cut to
 * offer, which aborts the reduction with StrategyExhausted.
 */
using BisectionStrategy = std::function<std::optional<std::pair<std::vector<int>, std::vector<int>>>(
    int round, int n, const std::vector<std::vector<VertexPair>>& matchings, Rng& rng)>;

// Uniformly random bisection each round.
inline BisectionStrategy random_bisection_strategy() {
  return [](int, int n, const std::vector<std::vector<VertexPair>>&,
            Rng& rng) -> std::optional<std::pair<std::vector<int>, std::vector<int>>> {
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) order[static_cast<std::size_t>(v)] = v;
    rng.shuffle(order);
    std::vector<int> a(order.begin(), order.begin() + n / 2);
    std::vector<int> b(order.begin() + n / 2, order.end());
    return std::pair{std::move(a), std::move(b)};
  };
}

// The same fixed bisection every round (an adversarial cut player).
inline BisectionStrategy fixed_bisection_strategy(std::vector<int> a, std::vector<int> b) {
  return [a = std::move(a), b = std::move(b)](
             int, int, const std::vector<std::vector<VertexPair>>&,
             Rng&) -> std::optional<std::pair<std::vector<int>, std::vector<int>>> {
    return std::pair{a, b};
  };
}

/**
 * Cut-or-embed reduction to max flow.  Each round the strategy bisects the
 * vertices into sources A and sinks B; a unit of demand per source is routed
 * through the graph with per-copy edge capacity ceil(1/phi) in each direction.
 * A saturating flow yields a perfect A-B matching embedded as flow paths; a
 * deficient flow yields the min-cut side as a sparse cut and the reduction
 * stops.  Surviving all `rounds` rounds returns the accumulated embedding.
 *
 * Odd vertex counts are padded with an auxiliary vertex attached to vertex 0;
 * the result is reported on the padded graph and flagged.
 */
inline KrvResult krv_reduce(const MultiGraph& g, double phi, const BisectionStrategy& strategy,
                            int rounds, std::uint64_t seed) {
  if (g.n() < 2) throw PreconditionViolated("reduction needs at least two vertices");
  if (phi <= 0.0 || phi > 1.0) throw PreconditionViolated("reduction needs phi in (0, 1]");
  if (rounds < 1) throw PreconditionViolated("reduction needs at least one round");

  KrvResult result;
  MultiGraph graph = g;
  if (graph.n() % 2 != 0) {
    result.padded = true;
    result.aux_vertex = graph.n();
    MultiGraph padded(graph.n() + 1);
    for (auto [u, v, mult] : graph.bundles()) padded.add_edge(u, v, mult);
    padded.add_edge(0, result.aux_vertex);
    graph = std::move(padded);
  }

  const int n = graph.n();
  const int source = n, sink = n + 1;
  const long long cap = static_cast<long long>(std::ceil(1.0 / phi - 1e-12));
  Rng rng(seed);
  ExpanderEmbedding embedding;

  for (int round = 0; round < rounds; ++round) {
    auto bisection = strategy(round, n, embedding.matchings, rng);
    if (!bisection)
      throw StrategyExhausted("bisection strategy gave up at round " + std::to_string(round));
    const auto& [a_side, b_side] = *bisection;
    {
      std::vector<char> seen(static_cast<std::size_t>(n), 0);
      if (a_side.size() != b_side.size() ||
          a_side.size() + b_side.size() != static_cast<std::size_t>(n))
        throw PreconditionViolated("strategy returned halves of the wrong size");
      for (int v : a_side)
        if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]++)
          throw PreconditionViolated("strategy returned overlapping or out-of-range halves");
      for (int v : b_side)
        if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]++)
          throw PreconditionViolated("strategy returned overlapping or out-of-range halves");
    }

    FlowNetwork net(n + 2);
    for (int v : a_side) net.add_arc(source, v, 1);
    for (int v : b_side) net.add_arc(v, sink, 1);
    for (auto [u, v, mult] : graph.bundles()) {
      net.add_arc(u, v, cap * mult);
      net.add_arc(v, u, cap * mult);
    }
    auto flow = net.max_flow(source, sink);

    if (flow.value < static_cast<long long>(a_side.size())) {
      SparseCut cut;
      for (int v = 0; v < n; ++v)
        if (flow.source_side[static_cast<std::size_t>(v)]) cut.side.push_back(v);
      long long crossing = 0, vol_in = 0, vol_out = 0;
      for (auto [u, v, mult] : graph.bundles()) {
        bool su = flow.source_side[static_cast<std::size_t>(u)];
        bool sv = flow.source_side[static_cast<std::size_t>(v)];
        if (su != sv)
          for (long long c = 0; c < mult; ++c) cut.cut_edges.push_back(ordered_pair(u, v));
        crossing += su != sv ? mult : 0;
        vol_in += (su ? mult : 0) + (sv ? mult : 0);
        vol_out += (!su ? mult : 0) + (!sv ? mult : 0);
      }
      long long denom = std::min(vol_in, vol_out);
      cut.sparsity =
          denom > 0 ? static_cast<double>(crossing) / static_cast<double>(denom) : 0.0;
      result.cut = std::move(cut);
      return result;
    }

    auto paths = flow_path_decomposition(n + 2, source, sink, flow.arc_flow);
    std::vector<VertexPair> matching;
    std::vector<std::vector<int>> interior_paths;
    for (auto& path : paths) {
      if (path.vertices.size() < 4)
        throw Error("embedding path too short to carry a matched pair");
      for (long long c = 0; c < path.value; ++c) {
        std::vector<int> interior(path.vertices.begin() + 1, path.vertices.end() - 1);
        matching.emplace_back(interior.front(), interior.back());
        for (std::size_t i = 0; i + 1 < interior.size(); ++i)
          ++embedding.edge_use[ordered_pair(interior[i], interior[i + 1])];
        interior_paths.push_back(std::move(interior));
      }
    }
    if (matching.size() != a_side.size())
      throw Error("saturating flow decomposed into the wrong number of unit paths");
    embedding.matchings.push_back(std::move(matching));
    embedding.round_paths.push_back(std::move(interior_paths));
    ++embedding.rounds;
  }

  for (const auto& [bundle, use] : embedding.edge_use) {
    double c = static_cast<double>(use) /
               static_cast<double>(graph.multiplicity(bundle.first, bundle.second));
    embedding.congestion = std::max(embedding.congestion, c);
  }
  result.embedding = std::move(embedding);
  return result;
}

}  // namespace hopex
