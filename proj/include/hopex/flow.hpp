#pragma once

#include <map>
#include <string>
#include <vector>

#include "hopex/errors.hpp"
#include "hopex/multigraph.hpp"

namespace hopex {

/**
 * Path-based fractional flow: positive value per simple vertex path.  Paths
 * are directed (they route the ordered demand from front() to back()); the
 * congestion they create on an edge bundle is total flow across the bundle
 * divided by its multiplicity.
 */
class Flow {
 public:
  void add_path(std::vector<int> path, double value) {
    if (value <= 0) throw PreconditionViolated("flow path with nonpositive value");
    if (path.size() < 2) throw PreconditionViolated("flow path with fewer than two vertices");
    paths_[std::move(path)] += value;
  }

  const std::map<std::vector<int>, double>& paths() const { return paths_; }
  bool empty() const { return paths_.empty(); }

  double value() const {
    double v = 0.0;
    for (const auto& [path, x] : paths_) v += x;
    return v;
  }

  // Longest path, in edges.
  int max_hops() const {
    std::size_t h = 0;
    for (const auto& [path, x] : paths_) h = std::max(h, path.size() - 1);
    return static_cast<int>(h);
  }

  // Paths must be simple and follow edges of g.
  void validate(const MultiGraph& g) const {
    for (const auto& [path, x] : paths_) {
      std::vector<int> sorted = path;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw PreconditionViolated("flow path repeats a vertex");
      for (std::size_t i = 0; i + 1 < path.size(); ++i)
        if (g.multiplicity(path[i], path[i + 1]) == 0)
          throw PreconditionViolated("flow path uses absent edge {" +
                                     std::to_string(path[i]) + "," +
                                     std::to_string(path[i + 1]) + "}");
    }
  }

  // Flow per bundle, keyed by ordered pair.
  std::map<VertexPair, double> edge_loads() const {
    std::map<VertexPair, double> loads;
    for (const auto& [path, x] : paths_)
      for (std::size_t i = 0; i + 1 < path.size(); ++i)
        loads[ordered_pair(path[i], path[i + 1])] += x;
    return loads;
  }

  // Max over bundles of flow/multiplicity.
  double congestion(const MultiGraph& g) const {
    double worst = 0.0;
    for (const auto& [key, load] : edge_loads()) {
      long long copies = g.multiplicity(key.first, key.second);
      if (copies == 0) throw PreconditionViolated("flow uses absent edge");
      worst = std::max(worst, load / static_cast<double>(copies));
    }
    return worst;
  }

  // The demand this flow routes: value summed per ordered (front, back) pair.
  Demand routed_demand() const {
    Demand d;
    for (const auto& [path, x] : paths_) d.add(path.front(), path.back(), x);
    return d;
  }

 private:
  std::map<std::vector<int>, double> paths_;
};

/**
 * A verified routing: the flow together with its recomputed hop and congestion
 * measures.  Construction recomputes both from the path map, so a witness can
 * always be re-checked from scratch.
 */
struct RoutingWitness {
  Flow flow;
  int max_hops = 0;
  double max_congestion = 0.0;

  static RoutingWitness from_flow(const MultiGraph& g, Flow f) {
    f.validate(g);
    RoutingWitness w;
    w.max_hops = f.max_hops();
    w.max_congestion = f.empty() ? 0.0 : f.congestion(g);
    w.flow = std::move(f);
    return w;
  }
};

}  // namespace hopex
