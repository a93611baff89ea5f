#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "hopex/errors.hpp"
#include "hopex/pseudo.hpp"

namespace hopex {

/**
 * A multiset of mixers (vertex subsets) over vertices 0..n-1.  The weight of a
 * vertex is the number of mixers containing it, counted with multiplicity, and
 * gamma(v) = 1/weight(v) is the fraction of v's mass handed to each of its
 * mixers in the two-step process:
 *
 *   step 1:  q(W)  = sum_{v in W} gamma(v) * p(v)
 *   step 2:  p'(v) = sum_{W containing v} (gamma(v) / gamma(W)) * q(W)
 *
 * where gamma(W) = sum_{v in W} gamma(v).  The process preserves total mass
 * and never decreases entropy.
 */
class MixerSystem {
 public:
  static MixerSystem from_mixers(std::size_t n, std::vector<std::vector<int>> mixers) {
    MixerSystem sys;
    sys.n_ = n;
    sys.weight_.assign(n, 0);
    for (const auto& mixer : mixers) {
      if (mixer.empty()) throw PreconditionViolated("mixer with no members");
      for (int v : mixer) {
        if (v < 0 || static_cast<std::size_t>(v) >= n)
          throw PreconditionViolated("mixer member " + std::to_string(v) + " out of range");
        ++sys.weight_[static_cast<std::size_t>(v)];
      }
    }
    sys.mixers_ = std::move(mixers);
    return sys;
  }

  std::size_t vertex_count() const { return n_; }
  std::size_t mixer_count() const { return mixers_.size(); }
  const std::vector<std::vector<int>>& mixers() const { return mixers_; }
  int weight(std::size_t v) const { return weight_[v]; }
  double gamma(std::size_t v) const { return 1.0 / static_cast<double>(weight_[v]); }

  double gamma_of_mixer(std::size_t w) const {
    double g = 0.0;
    for (int v : mixers_[w]) g += gamma(static_cast<std::size_t>(v));
    return g;
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::vector<int>> mixers_;
  std::vector<int> weight_;
};

// First step only: mass collected per mixer.  Throws UncoveredVertex if a
// vertex carries mass but belongs to no mixer (its mass would vanish).
inline std::vector<double> mix_intermediate(const std::vector<double>& p,
                                            const MixerSystem& sys) {
  if (p.size() != sys.vertex_count())
    throw PreconditionViolated("distribution/vertex-count mismatch in mix");
  for (std::size_t v = 0; v < p.size(); ++v)
    if (p[v] > 0.0 && sys.weight(v) == 0)
      throw UncoveredVertex("vertex " + std::to_string(v) + " has mass but no mixer");
  std::vector<double> q(sys.mixer_count(), 0.0);
  for (std::size_t w = 0; w < sys.mixer_count(); ++w)
    for (int v : sys.mixers()[w])
      q[w] += sys.gamma(static_cast<std::size_t>(v)) * p[static_cast<std::size_t>(v)];
  return q;
}

// Full two-step process.  Preserves sum(p); entropy of the result is >= the
// entropy of the input.
inline std::vector<double> mix(const std::vector<double>& p, const MixerSystem& sys) {
  std::vector<double> q = mix_intermediate(p, sys);
  std::vector<double> out(p.size(), 0.0);
  for (std::size_t w = 0; w < sys.mixer_count(); ++w) {
    double gw = sys.gamma_of_mixer(w);
    if (gw <= 0.0) continue;
    double share = q[w] / gw;
    for (int v : sys.mixers()[w])
      out[static_cast<std::size_t>(v)] += sys.gamma(static_cast<std::size_t>(v)) * share;
  }
  return out;
}

inline PseudoDistribution mix(const PseudoDistribution& p, const MixerSystem& sys) {
  return PseudoDistribution(mix(p.values(), sys));
}

inline std::vector<double> mix_intermediate(const PseudoDistribution& p,
                                            const MixerSystem& sys) {
  return mix_intermediate(p.values(), sys);
}

}  // namespace hopex
