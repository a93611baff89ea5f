#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hopex/clustering.hpp"
#include "hopex/errors.hpp"
#include "hopex/expander_decomp.hpp"
#include "hopex/mixing.hpp"
#include "hopex/multigraph.hpp"
#include "hopex/pseudo.hpp"
#include "hopex/rational.hpp"
#include "hopex/rng.hpp"
#include "hopex/routing.hpp"

namespace hopex {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/**
 * All game parameters.  derive_config fills the derived fields from (n, eps)
 * and the four tunable constants; every derived field can also be pinned
 * directly through the override map, with downstream defaults recomputed from
 * the overridden value.
 */
struct GameConfig {
  int n = 0;
  double eps = 0.5;

  // Tunable constants, named by their default values.
  long long c21 = 21, c36 = 36, c216 = 216, c324 = 324;

  long long k = 0;        // blocks per group: c21 * n^eps
  long long k_prime = 0;  // exit threshold divisor: c324^2 * k
  int b_max = 0;          // batch budget: ceil(c36 / eps)
  int h_sep = 0;          // cut separation: 2 * b_max
  int h_diam = 0;         // cluster diameter: ceil(h_sep / eps^2)
  int h = 0;              // routing hops for the oracle: h_diam
  double s = 1.0;         // hop stretch: max(1, 1/eps)
  int t = 0;              // final diameter target: ceil(h*s) + 2
  double kappa = 1.0;     // congestion slack: max(1, h * ln n)
  double phi = 0.0;       // oracle sparsity: k / (c216 * h * s * kappa)
  Rational c{1, 324};     // grouping density: 1 / c324
  Rational c_prime{1, 2};

  int cover_load_max = 0;       // clusterings allowed per cover; default n
  int final_route_samples = 16; // demands certified on the finished graph
  bool final_route_exact = false;  // min-congestion routing instead of witness search
  int random_matchings = 32;    // oracle sampler knobs
  int adversarial_roots = 8;

  bool eps_warning = false;  // eps below ln ln n / ln n
  std::map<std::string, std::string> overrides;  // as supplied by the caller
};

// The worked sizing of k' from the tuned constant, a cover of width `width`
// and load `load`, and the block count k.
inline long long paper_k_prime(long long c324, long long load, long long width, long long k) {
  return c324 * c324 * load * width * k;
}

namespace game_detail {

inline long long ceil_to_ll(double x) { return static_cast<long long>(std::ceil(x - 1e-9)); }

class OverrideReader {
 public:
  explicit OverrideReader(const std::map<std::string, std::string>& overrides)
      : overrides_(overrides) {}

  long long get_ll(const std::string& key, long long fallback) {
    auto raw = take(key);
    if (!raw) return fallback;
    try {
      std::size_t pos = 0;
      long long v = std::stoll(*raw, &pos);
      if (pos != raw->size()) throw std::invalid_argument(*raw);
      return v;
    } catch (const std::exception&) {
      throw InconsistentOverride("override " + key + " is not an integer: " + *raw);
    }
  }

  int get_int(const std::string& key, int fallback) {
    long long v = get_ll(key, fallback);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
      throw InconsistentOverride("override " + key + " does not fit an int");
    return static_cast<int>(v);
  }

  double get_double(const std::string& key, double fallback) {
    auto raw = take(key);
    if (!raw) return fallback;
    try {
      std::size_t pos = 0;
      double v = std::stod(*raw, &pos);
      if (pos != raw->size()) throw std::invalid_argument(*raw);
      return v;
    } catch (const std::exception&) {
      throw InconsistentOverride("override " + key + " is not a number: " + *raw);
    }
  }

  Rational get_rational(const std::string& key, Rational fallback) {
    auto raw = take(key);
    if (!raw) return fallback;
    try {
      return parse_rational(*raw);
    } catch (const std::exception&) {
      throw InconsistentOverride("override " + key + " is not a rational: " + *raw);
    }
  }

  void finish() const {
    for (const auto& [key, value] : overrides_)
      if (!used_.count(key)) throw InconsistentOverride("unknown override key: " + key);
  }

 private:
  std::optional<std::string> take(const std::string& key) {
    auto it = overrides_.find(key);
    if (it == overrides_.end()) return std::nullopt;
    used_.insert(key);
    return it->second;
  }

  const std::map<std::string, std::string>& overrides_;
  std::set<std::string> used_;
};

}  // namespace game_detail

inline GameConfig derive_config(int n, double eps,
                                const std::map<std::string, std::string>& overrides = {}) {
  if (n < 2) throw PreconditionViolated("game needs n >= 2");
  if (!(eps > 0.0) || eps > 1.0) throw PreconditionViolated("game needs eps in (0, 1]");

  GameConfig cfg;
  cfg.n = n;
  cfg.eps = eps;
  cfg.overrides = overrides;
  game_detail::OverrideReader read(overrides);

  cfg.c21 = read.get_ll("21", 21);
  cfg.c36 = read.get_ll("36", 36);
  cfg.c216 = read.get_ll("216", 216);
  cfg.c324 = read.get_ll("324", 324);

  cfg.k = read.get_ll(
      "k", game_detail::ceil_to_ll(static_cast<double>(cfg.c21) * std::pow(n, eps)));
  cfg.b_max = read.get_int(
      "bmax", static_cast<int>(game_detail::ceil_to_ll(static_cast<double>(cfg.c36) / eps)));
  cfg.h_sep = read.get_int("hsep", 2 * cfg.b_max);
  cfg.h_diam = read.get_int(
      "hdiam", static_cast<int>(game_detail::ceil_to_ll(cfg.h_sep / (eps * eps))));
  cfg.h = read.get_int("h", cfg.h_diam);
  cfg.s = read.get_double("s", std::max(1.0, 1.0 / eps));
  cfg.t = read.get_int(
      "t", static_cast<int>(game_detail::ceil_to_ll(cfg.h * cfg.s)) + 2);
  cfg.kappa = read.get_double("kappa", std::max(1.0, cfg.h * std::log(static_cast<double>(n))));
  cfg.phi = read.get_double(
      "phi", static_cast<double>(cfg.k) / (static_cast<double>(cfg.c216) * cfg.h * cfg.s * cfg.kappa));
  cfg.k_prime = read.get_ll("kprime", cfg.c324 * cfg.c324 * cfg.k);
  cfg.c = read.get_rational("c", Rational(1, cfg.c324));
  cfg.c_prime = read.get_rational("cprime", Rational(1, 2));
  cfg.cover_load_max = read.get_int("loadmax", n);
  cfg.final_route_samples = read.get_int("route_samples", 16);
  cfg.final_route_exact = read.get_ll("route_exact", 0) != 0;
  cfg.random_matchings = read.get_int("decomp_matchings", 32);
  cfg.adversarial_roots = read.get_int("decomp_roots", 8);
  read.finish();

  if (cfg.k < 2) throw InconsistentOverride("derived k below 2");
  if (cfg.k_prime < 1) throw InconsistentOverride("derived k' below 1");
  if (cfg.b_max < 1) throw InconsistentOverride("derived batch budget below 1");
  if (cfg.h_sep < 1) throw InconsistentOverride("derived separation below 1");
  if (cfg.h_diam < cfg.h_sep) throw InconsistentOverride("derived h_diam below h_sep");
  if (cfg.h < 1) throw InconsistentOverride("derived h below 1");
  if (cfg.s < 1.0) throw InconsistentOverride("derived s below 1");
  if (cfg.t < 2) throw InconsistentOverride("derived t below 2");
  if (!(cfg.kappa > 0.0)) throw InconsistentOverride("derived kappa not positive");
  if (!(cfg.phi > 0.0)) throw InconsistentOverride("derived phi not positive");
  if (!(Rational(0) < cfg.c && cfg.c < Rational(1)))
    throw InconsistentOverride("derived c outside (0,1)");
  if (!(Rational(0) < cfg.c_prime && cfg.c_prime < Rational(1)))
    throw InconsistentOverride("derived c' outside (0,1)");
  if (cfg.cover_load_max < 1) throw InconsistentOverride("derived cover load cap below 1");
  if (cfg.final_route_samples < 0) throw InconsistentOverride("negative sample count");

  cfg.eps_warning =
      n >= 3 && eps < std::log(std::log(static_cast<double>(n))) / std::log(static_cast<double>(n));
  return cfg;
}

inline nlohmann::json to_json(const GameConfig& cfg) {
  nlohmann::json j;
  j["n"] = cfg.n;
  j["eps"] = cfg.eps;
  j["c21"] = cfg.c21;
  j["c36"] = cfg.c36;
  j["c216"] = cfg.c216;
  j["c324"] = cfg.c324;
  j["k"] = cfg.k;
  j["kprime"] = cfg.k_prime;
  j["bmax"] = cfg.b_max;
  j["hsep"] = cfg.h_sep;
  j["hdiam"] = cfg.h_diam;
  j["h"] = cfg.h;
  j["s"] = cfg.s;
  j["t"] = cfg.t;
  j["kappa"] = cfg.kappa;
  j["phi"] = cfg.phi;
  j["c"] = cfg.c.str();
  j["cprime"] = cfg.c_prime.str();
  j["loadmax"] = cfg.cover_load_max;
  j["route_samples"] = cfg.final_route_samples;
  j["route_exact"] = cfg.final_route_exact;
  j["decomp_matchings"] = cfg.random_matchings;
  j["decomp_roots"] = cfg.adversarial_roots;
  j["eps_warning"] = cfg.eps_warning;
  j["overrides"] = cfg.overrides;
  return j;
}

// ---------------------------------------------------------------------------
// Matching players
// ---------------------------------------------------------------------------

struct CutPresentation {
  int iteration = 0;
  int group = 0;  // -1 in the final phase
  int block_a = 0, block_b = 0;
  bool final_phase = false;
  std::vector<int> a, b;  // equal-size disjoint vertex lists
};

struct PlayerView {
  const MultiGraph* g = nullptr;
  const std::vector<std::vector<double>>* commodities = nullptr;  // [commodity][vertex]
};

/**
 * The matching player answers each presented cut with a matching between the
 * two blocks.  Partial matchings are allowed in the main loop (unmatched
 * vertices leak); the final phase insists on perfect ones.
 */
class MatchingPlayer {
 public:
  virtual ~MatchingPlayer() = default;
  virtual std::string name() const = 0;
  virtual std::vector<VertexPair> respond(const CutPresentation& cut, const PlayerView& view,
                                          Rng& rng) = 0;
};

// Throws DegreeViolation unless `pairs` is a partial bijection a <-> b.
inline void validate_matching(const CutPresentation& cut, const std::vector<VertexPair>& pairs) {
  std::set<int> in_a(cut.a.begin(), cut.a.end());
  std::set<int> in_b(cut.b.begin(), cut.b.end());
  std::set<int> used;
  for (auto [x, y] : pairs) {
    if (!in_a.count(x) || !in_b.count(y))
      throw DegreeViolation("matched pair leaves the presented blocks");
    if (!used.insert(x).second || !used.insert(y).second)
      throw DegreeViolation("vertex matched twice within one cut");
  }
}

namespace game_detail {

// Drops floor(alpha * size) pairs, chosen by the rng.
inline std::vector<VertexPair> drop_fraction(std::vector<VertexPair> pairs, double alpha,
                                             Rng& rng) {
  auto drop = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(pairs.size()) + 1e-12));
  if (drop == 0) return pairs;
  rng.shuffle(pairs);
  pairs.resize(pairs.size() - std::min(drop, pairs.size()));
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

}  // namespace game_detail

/** Matches the blocks by a uniformly random bijection. */
class RandomMatchingPlayer final : public MatchingPlayer {
 public:
  explicit RandomMatchingPlayer(double alpha_remove = 0.0) : alpha_remove_(alpha_remove) {}
  std::string name() const override { return "random"; }

  std::vector<VertexPair> respond(const CutPresentation& cut, const PlayerView&,
                                  Rng& rng) override {
    std::vector<int> partners = cut.b;
    rng.shuffle(partners);
    std::vector<VertexPair> pairs;
    pairs.reserve(cut.a.size());
    for (std::size_t i = 0; i < cut.a.size(); ++i) pairs.emplace_back(cut.a[i], partners[i]);
    return game_detail::drop_fraction(std::move(pairs), alpha_remove_, rng);
  }

 private:
  double alpha_remove_;
};

/**
 * Greedy adversary that pairs vertices whose commodity profiles are closest in
 * L1 distance, trying to gain as little entropy as possible.
 */
class LazyMatchingPlayer final : public MatchingPlayer {
 public:
  explicit LazyMatchingPlayer(double alpha_remove = 0.0) : alpha_remove_(alpha_remove) {}
  std::string name() const override { return "lazy"; }

  std::vector<VertexPair> respond(const CutPresentation& cut, const PlayerView& view,
                                  Rng& rng) override {
    const auto& cols = *view.commodities;
    std::vector<char> taken(cut.b.size(), 0);
    std::vector<VertexPair> pairs;
    pairs.reserve(cut.a.size());
    for (int x : cut.a) {
      std::size_t best = cut.b.size();
      double best_dist = 0.0;
      for (std::size_t j = 0; j < cut.b.size(); ++j) {
        if (taken[j]) continue;
        double dist = 0.0;
        for (const auto& col : cols)
          dist += std::abs(col[static_cast<std::size_t>(x)] -
                           col[static_cast<std::size_t>(cut.b[j])]);
        if (best == cut.b.size() || dist < best_dist - 1e-15) {
          best = j;
          best_dist = dist;
        }
      }
      taken[best] = 1;
      pairs.emplace_back(x, cut.b[best]);
    }
    return game_detail::drop_fraction(std::move(pairs), alpha_remove_, rng);
  }

 private:
  double alpha_remove_;
};

/** Greedy adversary that pairs each vertex with the nearest free partner. */
class LocalityMatchingPlayer final : public MatchingPlayer {
 public:
  explicit LocalityMatchingPlayer(double alpha_remove = 0.0) : alpha_remove_(alpha_remove) {}
  std::string name() const override { return "locality"; }

  std::vector<VertexPair> respond(const CutPresentation& cut, const PlayerView& view,
                                  Rng& rng) override {
    std::vector<char> taken(cut.b.size(), 0);
    std::vector<VertexPair> pairs;
    pairs.reserve(cut.a.size());
    for (int x : cut.a) {
      auto dist = bfs_distances(*view.g, x);
      std::size_t best = cut.b.size();
      int best_dist = 0;
      for (std::size_t j = 0; j < cut.b.size(); ++j) {
        if (taken[j]) continue;
        int d = dist[static_cast<std::size_t>(cut.b[j])];
        if (d < 0) d = std::numeric_limits<int>::max();  // unreachable sorts last
        if (best == cut.b.size() || d < best_dist) {
          best = j;
          best_dist = d;
        }
      }
      taken[best] = 1;
      pairs.emplace_back(x, cut.b[best]);
    }
    return game_detail::drop_fraction(std::move(pairs), alpha_remove_, rng);
  }

 private:
  double alpha_remove_;
};

inline std::unique_ptr<MatchingPlayer> make_player(const std::string& name,
                                                   double alpha_remove = 0.0) {
  if (name == "random") return std::make_unique<RandomMatchingPlayer>(alpha_remove);
  if (name == "lazy") return std::make_unique<LazyMatchingPlayer>(alpha_remove);
  if (name == "locality") return std::make_unique<LocalityMatchingPlayer>(alpha_remove);
  throw PreconditionViolated("unknown player: " + name);
}

// ---------------------------------------------------------------------------
// Commodity state
// ---------------------------------------------------------------------------

struct LeakageComponents {
  double ed = 0.0;      // mass that crossed a later-removed edge
  double load0 = 0.0;   // mass stranded on unmatched vertices during a walk
  double removed = 0.0; // mass on vertices the player declined to match
  double total() const { return ed + load0 + removed; }
};

/**
 * One pseudo-distribution column per commodity, split into a typical and a
 * leaked part (typical + leaked == column, exactly).  Walk steps mix all three
 * through the same doubly stochastic operator built from the played matchings;
 * leak transfers only ever move mass from typical to leaked.
 */
class CommodityState {
 public:
  explicit CommodityState(int n)
      : n_(n),
        p_(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0)),
        typical_(p_),
        leaked_(p_) {
    for (int c = 0; c < n; ++c) {
      p_[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)] = 1.0;
      typical_[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)] = 1.0;
    }
  }

  int n() const { return n_; }
  const std::vector<std::vector<double>>& columns() const { return p_; }
  const std::vector<std::vector<double>>& typical() const { return typical_; }
  const std::vector<std::vector<double>>& leaked() const { return leaked_; }
  const LeakageComponents& components() const { return components_; }

  double entropy_total() const {
    double h = 0.0;
    for (const auto& col : p_)
      for (double u : col) h += entropy_term(u);
    return h;
  }

  double typical_mass() const {
    double m = 0.0;
    for (const auto& col : typical_)
      for (double u : col) m += u;
    return m;
  }

  double alpha() const { return typical_mass() / static_cast<double>(n_); }

  /**
   * Retroactive leak for removed edge copies: each commodity loses the share
   * of its recorded crossings proportional to the removed copies, applied
   * proportionally across its typical mass.  Call with the graph still
   * containing the copies about to be removed.
   */
  void apply_cut(const Cut& cut, const MultiGraph& g) {
    std::map<VertexPair, long long> copies;
    for (auto [u, v] : cut) ++copies[ordered_pair(u, v)];
    for (const auto& [bundle, removed] : copies) {
      auto rec = crossed_.find(bundle);
      if (rec == crossed_.end()) continue;
      long long present = g.multiplicity(bundle.first, bundle.second);
      if (present < removed)
        throw Error("cut removes more copies than the graph holds");
      double share = static_cast<double>(removed) / static_cast<double>(present);
      for (int c = 0; c < n_; ++c) {
        double leak = rec->second[static_cast<std::size_t>(c)] * share;
        rec->second[static_cast<std::size_t>(c)] -= leak;
        if (leak <= 0.0) continue;
        components_.ed += drain_typical(c, leak);
      }
    }
  }

  struct WalkReport {
    double entropy_before = 0.0, entropy_after = 0.0, delta = 0.0;
    double alpha_walk = 0.0;  // typical fraction entering the mixing step
    bool locality_ok = true;  // per group, typical mass confined to one block
  };

  /**
   * One walk: leak transfers for declined and unmatched vertices, then a
   * two-step mix through closed neighborhoods of the played matchings
   * (vertices without matched edges keep their mass via singleton mixers).
   * Edge-crossing records of the typical pass feed later apply_cut calls.
   */
  WalkReport walk(const std::vector<CutPresentation>& cuts,
                  const std::vector<std::vector<VertexPair>>& responses,
                  const Grouping& grouping) {
    if (cuts.size() != responses.size())
      throw PreconditionViolated("one response per presented cut required");
    WalkReport report;
    report.entropy_before = entropy_total();

    // Vertices the player declined in at least one cut, and matched degrees.
    std::vector<char> declined(static_cast<std::size_t>(n_), 0);
    std::vector<long long> degree(static_cast<std::size_t>(n_), 0);
    std::map<VertexPair, long long> played;
    for (std::size_t i = 0; i < cuts.size(); ++i) {
      std::set<int> matched;
      for (auto [x, y] : responses[i]) {
        matched.insert(x);
        matched.insert(y);
        ++degree[static_cast<std::size_t>(x)];
        ++degree[static_cast<std::size_t>(y)];
        ++played[ordered_pair(x, y)];
      }
      for (int v : cuts[i].a)
        if (!matched.count(v)) declined[static_cast<std::size_t>(v)] = 1;
      for (int v : cuts[i].b)
        if (!matched.count(v)) declined[static_cast<std::size_t>(v)] = 1;
    }

    for (int v = 0; v < n_; ++v) {
      if (declined[static_cast<std::size_t>(v)])
        components_.removed += strand_vertex(v);
      else if (degree[static_cast<std::size_t>(v)] == 0)
        components_.load0 += strand_vertex(v);
    }
    report.alpha_walk = alpha();
    report.locality_ok = locality_holds(grouping);

    // Closed neighborhoods with multiplicity; singletons keep the operator
    // doubly stochastic on unmatched vertices.
    std::vector<int> owner;
    std::vector<std::vector<int>> mixers(static_cast<std::size_t>(n_));
    owner.reserve(static_cast<std::size_t>(n_));
    for (int v = 0; v < n_; ++v) {
      mixers[static_cast<std::size_t>(v)].push_back(v);
      owner.push_back(v);
    }
    for (const auto& [bundle, mult] : played)
      for (long long m = 0; m < mult; ++m) {
        mixers[static_cast<std::size_t>(bundle.first)].push_back(bundle.second);
        mixers[static_cast<std::size_t>(bundle.second)].push_back(bundle.first);
      }
    for (auto& w : mixers) std::sort(w.begin(), w.end());
    auto sys = MixerSystem::from_mixers(n_, mixers);

    for (int c = 0; c < n_; ++c) {
      auto& col = p_[static_cast<std::size_t>(c)];
      auto& typ = typical_[static_cast<std::size_t>(c)];
      record_crossings(c, typ, owner, mixers, sys);
      auto col_next = mix(col, sys);
      auto typ_next = mix(typ, sys);
      double total = 0.0;
      for (std::size_t v = 0; v < col_next.size(); ++v) {
        double leak = col_next[v] - typ_next[v];
        leaked_[static_cast<std::size_t>(c)][v] = leak < 0.0 ? 0.0 : leak;
        total += col_next[v];
      }
      if (std::abs(total - 1.0) > 1e-6)
        throw Error("commodity mass drifted during the walk");
      col = std::move(col_next);
      typ = std::move(typ_next);
    }

    report.entropy_after = entropy_total();
    report.delta = report.entropy_after - report.entropy_before;
    return report;
  }

 private:
  // Moves `amount` of commodity c's typical mass to leaked, spread
  // proportionally; returns the amount actually moved.
  double drain_typical(int c, double amount) {
    auto& typ = typical_[static_cast<std::size_t>(c)];
    auto& lkd = leaked_[static_cast<std::size_t>(c)];
    double total = 0.0;
    for (double u : typ) total += u;
    if (total <= 1e-15) return 0.0;
    double moved = std::min(amount, total);
    double factor = moved / total;
    for (std::size_t v = 0; v < typ.size(); ++v) {
      double shift = typ[v] * factor;
      typ[v] -= shift;
      lkd[v] += shift;
    }
    return moved;
  }

  // Pointwise transfer of every commodity's typical mass at vertex v.
  double strand_vertex(int v) {
    double moved = 0.0;
    for (int c = 0; c < n_; ++c) {
      double& tv = typical_[static_cast<std::size_t>(c)][static_cast<std::size_t>(v)];
      if (tv <= 0.0) continue;
      leaked_[static_cast<std::size_t>(c)][static_cast<std::size_t>(v)] += tv;
      moved += tv;
      tv = 0.0;
    }
    return moved;
  }

  bool locality_holds(const Grouping& grouping) const {
    for (int c = 0; c < n_; ++c) {
      const auto& typ = typical_[static_cast<std::size_t>(c)];
      for (const auto& group : grouping.groups) {
        int hit = 0;
        for (const auto& block : group) {
          double mass = 0.0;
          for (int v : block) mass += typ[static_cast<std::size_t>(v)];
          if (mass > 1e-9 && ++hit > 1) return false;
        }
      }
    }
    return true;
  }

  /**
   * Records, per matched bundle, how much typical mass crosses it in this
   * walk: the inflow leg into each neighborhood plus the outflow leg, with
   * round trips (mass returning to its origin through the same bundle)
   * counted once.
   */
  void record_crossings(int c, const std::vector<double>& typ, const std::vector<int>& owner,
                        const std::vector<std::vector<int>>& mixers, const MixerSystem& sys) {
    for (std::size_t mi = 0; mi < mixers.size(); ++mi) {
      const auto& members = mixers[mi];
      if (members.size() < 2) continue;
      int u = owner[mi];
      double q = 0.0, gamma_w = 0.0;
      std::map<int, int> occ;
      for (int v : members) {
        q += sys.gamma(v) * typ[static_cast<std::size_t>(v)];
        gamma_w += sys.gamma(v);
        ++occ[v];
      }
      for (const auto& [x, count] : occ) {
        if (x == u) continue;
        double gamma_x = sys.gamma(x);
        double inflow = count * gamma_x * typ[static_cast<std::size_t>(x)];
        double outflow = count * (gamma_x / gamma_w) * q;
        double round_trip = inflow * count * gamma_x / gamma_w;
        double crossing = inflow + std::max(0.0, outflow - round_trip);
        if (crossing <= 0.0) continue;
        auto& rec = crossed_[ordered_pair(u, x)];
        if (rec.empty()) rec.assign(static_cast<std::size_t>(n_), 0.0);
        rec[static_cast<std::size_t>(c)] += crossing;
      }
    }
  }

  int n_;
  std::vector<std::vector<double>> p_, typical_, leaked_;
  std::map<VertexPair, std::vector<double>> crossed_;
  LeakageComponents components_;
};

// ---------------------------------------------------------------------------
// Transcript
// ---------------------------------------------------------------------------

struct IterationRecord {
  int iteration = 0;
  long long cut_copies = 0;
  int cover_width = 0, cover_load = 0;
  long long cover_max_cluster = 0;
  bool exited = false;  // the large-cluster exit fired; nothing below happened
  int groups = 0;
  long long block_size = 0, dropped = 0;
  int grouping_load = 0;
  int cuts_presented = 0;
  long long pairs_matched = 0, pairs_refused = 0;
  double entropy_before = 0.0, entropy_after = 0.0, delta_entropy = 0.0;
  double alpha = 0.0;
  double leak_ed = 0.0, leak_load0 = 0.0, leak_removed = 0.0;  // cumulative
  bool cond_hsep = false, cond_locality = false, cond_load = false, cond_alpha = false;
  bool thm_applicable = false;
  double thm_bound = 0.0;
  bool thm_satisfied = true;
};

struct FinalRecord {
  long long cluster_size = 0;
  int k2 = 0;  // chunks matched into the exit cluster
  int final_cuts = 0;
  long long final_pairs = 0;
  int diameter = -1;
  int t = 0;
  bool diameter_ok = false;
  int routed_samples = 0;
  double max_congestion = 0.0;
  double eta_bound = 0.0;
  bool congestion_ok = false;
  long long max_degree = 0, degree_bound = 0;
  bool degree_ok = false;
  double entropy_total = 0.0, entropy_cap = 0.0;
  int r_total = 0, b_used = 0;
};

struct GameTranscript {
  int schema_version = 1;
  int n = 0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::string player;
  std::string status;   // completed | batch_limit | <error kind>
  std::string message;  // detail for non-completed statuses
  nlohmann::json config;
  std::vector<IterationRecord> iterations;
  std::optional<FinalRecord> final_record;
};

struct GameResult {
  std::string status;
  std::optional<MultiGraph> g_final;
  GameTranscript transcript;
};

inline nlohmann::json to_json(const IterationRecord& r) {
  nlohmann::json j;
  j["iteration"] = r.iteration;
  j["cut_copies"] = r.cut_copies;
  j["cover"] = {{"width", r.cover_width}, {"load", r.cover_load},
                {"max_cluster", r.cover_max_cluster}};
  j["exited"] = r.exited;
  j["grouping"] = {{"groups", r.groups}, {"block_size", r.block_size},
                   {"dropped", r.dropped}, {"load", r.grouping_load}};
  j["cuts_presented"] = r.cuts_presented;
  j["pairs_matched"] = r.pairs_matched;
  j["pairs_refused"] = r.pairs_refused;
  j["entropy_before"] = r.entropy_before;
  j["entropy_after"] = r.entropy_after;
  j["delta_entropy"] = r.delta_entropy;
  j["alpha"] = r.alpha;
  j["leak"] = {{"ed", r.leak_ed}, {"load0", r.leak_load0}, {"removed", r.leak_removed}};
  j["conditions"] = {{"hsep", r.cond_hsep}, {"locality", r.cond_locality},
                     {"load", r.cond_load}, {"alpha", r.cond_alpha}};
  j["thm"] = {{"applicable", r.thm_applicable}, {"bound", r.thm_bound},
              {"satisfied", r.thm_satisfied}};
  return j;
}

inline nlohmann::json to_json(const FinalRecord& r) {
  nlohmann::json j;
  j["cluster_size"] = r.cluster_size;
  j["k2"] = r.k2;
  j["final_cuts"] = r.final_cuts;
  j["final_pairs"] = r.final_pairs;
  j["diameter"] = r.diameter;
  j["t"] = r.t;
  j["diameter_ok"] = r.diameter_ok;
  j["routed_samples"] = r.routed_samples;
  j["max_congestion"] = r.max_congestion;
  j["eta_bound"] = r.eta_bound;
  j["congestion_ok"] = r.congestion_ok;
  j["max_degree"] = r.max_degree;
  j["degree_bound"] = r.degree_bound;
  j["degree_ok"] = r.degree_ok;
  j["entropy_total"] = r.entropy_total;
  j["entropy_cap"] = r.entropy_cap;
  j["r_total"] = r.r_total;
  j["b_used"] = r.b_used;
  return j;
}

inline nlohmann::json to_json(const GameTranscript& tr) {
  nlohmann::json j;
  j["schema_version"] = tr.schema_version;
  j["n"] = tr.n;
  j["eps"] = tr.eps;
  j["seed"] = tr.seed;
  j["player"] = tr.player;
  j["status"] = tr.status;
  j["message"] = tr.message;
  j["config"] = tr.config;
  j["iterations"] = nlohmann::json::array();
  for (const auto& rec : tr.iterations) j["iterations"].push_back(to_json(rec));
  j["final"] = tr.final_record ? to_json(*tr.final_record) : nlohmann::json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

namespace game_detail {

struct FinalPhaseInput {
  const GameConfig* cfg;
  MultiGraph* g;
  MatchingPlayer* player;
  const CommodityState* state;
  std::vector<int> s_star;
  int b_used;
  int r_total;
  int grouping_load_max;
};

inline FinalRecord run_final_phase(FinalPhaseInput in, Rng& rng) {
  const GameConfig& cfg = *in.cfg;
  MultiGraph& g = *in.g;
  FinalRecord fr;
  fr.t = cfg.t;
  fr.b_used = in.b_used;
  std::sort(in.s_star.begin(), in.s_star.end());
  fr.cluster_size = static_cast<long long>(in.s_star.size());

  std::vector<char> in_star(static_cast<std::size_t>(cfg.n), 0);
  for (int v : in.s_star) in_star[static_cast<std::size_t>(v)] = 1;
  std::vector<int> rest;
  for (int v = 0; v < cfg.n; ++v)
    if (!in_star[static_cast<std::size_t>(v)]) rest.push_back(v);
  fr.k2 = rest.empty() ? 0
                       : static_cast<int>(ceil_div(static_cast<long long>(rest.size()),
                                                   static_cast<long long>(in.s_star.size())));

  PlayerView view{&g, &in.state->columns()};
  for (std::size_t off = 0; off < rest.size(); off += in.s_star.size()) {
    std::size_t len = std::min(in.s_star.size(), rest.size() - off);
    CutPresentation cp;
    cp.group = -1;
    cp.final_phase = true;
    cp.a.assign(rest.begin() + static_cast<long>(off),
                rest.begin() + static_cast<long>(off + len));
    cp.b.assign(in.s_star.begin(), in.s_star.begin() + static_cast<long>(len));
    auto pairs = in.player->respond(cp, view, rng);
    if (pairs.size() != len)
      throw PlayerRefused("final phase needs a perfect matching; got " +
                          std::to_string(pairs.size()) + " of " + std::to_string(len));
    validate_matching(cp, pairs);
    for (auto [x, y] : pairs) g.add_edge(x, y);
    ++fr.final_cuts;
    fr.final_pairs += static_cast<long long>(pairs.size());
  }
  fr.r_total = in.r_total + fr.final_cuts;

  fr.max_degree = g.max_degree();
  fr.degree_bound = static_cast<long long>(in.b_used) * in.grouping_load_max * (cfg.k - 1) +
                    static_cast<long long>(fr.k2);
  fr.degree_ok = fr.max_degree <= fr.degree_bound;

  auto diam = diameter(g);
  fr.diameter = diam ? *diam : -1;
  fr.diameter_ok = diam && *diam <= cfg.t;

  fr.eta_bound = 4.0 * std::max(1, fr.k2) * std::log(static_cast<double>(cfg.n)) / cfg.phi;
  fr.congestion_ok = true;
  RouteOptions opts;
  for (int i = 0; i < cfg.final_route_samples; ++i) {
    Demand demand = decomp_detail::matching_demand(g, cfg.t, rng);
    if (demand.total() <= 0.0) continue;
    ++fr.routed_samples;
    double congestion;
    if (cfg.final_route_exact) {
      auto routed = route_demand_exact(g, demand, cfg.t, opts);
      if (std::holds_alternative<RoutingInfeasible>(routed)) {
        fr.congestion_ok = false;
        continue;
      }
      congestion = std::get<RouteValue>(routed).congestion;
    } else {
      auto verdict = verify_routing(g, demand, cfg.t, fr.eta_bound, opts);
      if (std::holds_alternative<RoutingInfeasible>(verdict)) {
        fr.congestion_ok = false;
        continue;
      }
      congestion = std::get<RoutingWitness>(verdict).max_congestion;
    }
    fr.max_congestion = std::max(fr.max_congestion, congestion);
  }
  if (fr.max_congestion > fr.eta_bound + 1e-9) fr.congestion_ok = false;
  return fr;
}

}  // namespace game_detail

/**
 * The full game: each iteration asks the certify-or-cut oracle for edges to
 * remove, covers the survivor with well-separated clusterings, exits once a
 * cluster reaches n/k' vertices, and otherwise turns the cover into groups of
 * k blocks, presents all pairwise block cuts, and mixes the commodities
 * through the matchings the player returns.  The final phase matches the rest
 * of the graph into the exit cluster and certifies hop-bounded routability.
 */
inline GameResult run_game(const GameConfig& cfg, MatchingPlayer& player, std::uint64_t seed) {
  GameResult result;
  GameTranscript& tr = result.transcript;
  tr.n = cfg.n;
  tr.eps = cfg.eps;
  tr.seed = seed;
  tr.player = player.name();
  tr.config = to_json(cfg);

  MultiGraph g(cfg.n);
  CommodityState state(cfg.n);
  Rng root(seed);
  DecompositionParams dp;
  dp.h = cfg.h;
  dp.s = cfg.s;
  dp.phi = cfg.phi;
  dp.kappa = cfg.kappa;
  dp.random_matchings = cfg.random_matchings;
  dp.adversarial_roots = cfg.adversarial_roots;

  int b_used = 0;
  int r_total = 0;
  int grouping_load_max = 0;
  try {
    for (int iter = 1; iter <= cfg.b_max + 1; ++iter) {
      IterationRecord rec;
      rec.iteration = iter;

      auto decomp = decompose_expander(g, dp, root.fork(static_cast<std::uint64_t>(iter)).next());
      rec.cut_copies = static_cast<long long>(decomp.cut.size());
      if (!decomp.cut.empty()) {
        state.apply_cut(decomp.cut, g);
        g = subtract(g, decomp.cut);
      }

      auto cover = build_cover(g, cfg.h_sep, cfg.h_diam, cfg.cover_load_max);
      rec.cover_width = cover.width();
      rec.cover_load = cover.load();
      auto big = largest_cluster(cover);
      rec.cover_max_cluster = big ? static_cast<long long>(big->cluster.size()) : 0;
      rec.entropy_before = state.entropy_total();

      if (big && static_cast<long long>(big->cluster.size()) * cfg.k_prime >=
                     static_cast<long long>(cfg.n)) {
        rec.exited = true;
        rec.entropy_after = rec.entropy_before;
        rec.alpha = state.alpha();
        const auto& comp = state.components();
        rec.leak_ed = comp.ed;
        rec.leak_load0 = comp.load0;
        rec.leak_removed = comp.removed;
        tr.iterations.push_back(rec);

        game_detail::FinalPhaseInput in;
        in.cfg = &cfg;
        in.g = &g;
        in.player = &player;
        in.state = &state;
        in.s_star = big->cluster;
        in.b_used = b_used;
        in.r_total = r_total;
        in.grouping_load_max = grouping_load_max;
        Rng final_rng = root.fork(999983);
        auto fr = game_detail::run_final_phase(std::move(in), final_rng);
        fr.entropy_total = state.entropy_total();
        fr.entropy_cap = static_cast<double>(cfg.n) * std::log(static_cast<double>(cfg.n));
        tr.final_record = fr;
        result.status = "completed";
        result.g_final = std::move(g);
        tr.status = result.status;
        return result;
      }

      if (iter > cfg.b_max) {
        rec.entropy_after = rec.entropy_before;
        rec.alpha = state.alpha();
        tr.iterations.push_back(rec);
        result.status = "batch_limit";
        tr.message = "no cluster reached n/k' within the batch budget";
        break;
      }

      auto grouping = decompose_clustering(cover, cfg.c, cfg.c_prime,
                                           static_cast<int>(cfg.k), cfg.k_prime);
      rec.groups = grouping.group_count();
      rec.block_size = grouping.groups.empty() ? 0 : grouping.block_size;
      rec.dropped = static_cast<long long>(grouping.dropped.size());
      rec.grouping_load = grouping.load();

      if (grouping.groups.empty()) {
        rec.entropy_after = rec.entropy_before;
        rec.alpha = state.alpha();
        const auto& comp = state.components();
        rec.leak_ed = comp.ed;
        rec.leak_load0 = comp.load0;
        rec.leak_removed = comp.removed;
        tr.iterations.push_back(rec);
        continue;  // nothing to present; the graph is unchanged
      }

      ++b_used;
      grouping_load_max = std::max(grouping_load_max, rec.grouping_load);
      std::vector<CutPresentation> cuts;
      std::vector<std::vector<VertexPair>> responses;
      PlayerView view{&g, &state.columns()};
      Rng player_rng = root.fork(100000 + static_cast<std::uint64_t>(iter));
      for (std::size_t gi = 0; gi < grouping.groups.size(); ++gi) {
        const auto& blocks = grouping.groups[gi];
        for (std::size_t a = 0; a < blocks.size(); ++a)
          for (std::size_t b = a + 1; b < blocks.size(); ++b) {
            CutPresentation cp;
            cp.iteration = iter;
            cp.group = static_cast<int>(gi);
            cp.block_a = static_cast<int>(a);
            cp.block_b = static_cast<int>(b);
            cp.a = blocks[a];
            cp.b = blocks[b];
            auto pairs = player.respond(cp, view, player_rng);
            validate_matching(cp, pairs);
            rec.pairs_matched += static_cast<long long>(pairs.size());
            rec.pairs_refused +=
                static_cast<long long>(cp.a.size()) - static_cast<long long>(pairs.size());
            cuts.push_back(std::move(cp));
            responses.push_back(std::move(pairs));
          }
      }
      rec.cuts_presented = static_cast<int>(cuts.size());
      r_total += rec.cuts_presented;

      auto walk = state.walk(cuts, responses, grouping);
      rec.entropy_after = walk.entropy_after;
      rec.delta_entropy = walk.delta;
      rec.alpha = walk.alpha_walk;
      const auto& comp = state.components();
      rec.leak_ed = comp.ed;
      rec.leak_load0 = comp.load0;
      rec.leak_removed = comp.removed;

      int load_m = rec.grouping_load;
      rec.cond_hsep = cfg.h_sep >= 2 * iter;
      rec.cond_locality = walk.locality_ok;
      rec.cond_load = load_m >= 1;
      rec.cond_alpha = walk.alpha_walk >= 2.0 / 3.0 - 1e-9;
      rec.thm_applicable = rec.cond_hsep && rec.cond_locality && rec.cond_load && rec.cond_alpha;
      if (rec.cond_load) {
        double kk = static_cast<double>(cfg.k);
        rec.thm_bound = walk.alpha_walk * cfg.n *
                        ((2.0 / 3.0) * std::log(kk * kk / load_m) - std::log(load_m * kk + 1.0));
      }
      rec.thm_satisfied = !rec.thm_applicable || walk.delta + 1e-9 >= rec.thm_bound;

      if (walk.delta < -1e-9) throw Error("entropy decreased during a walk");
      double cap = static_cast<double>(cfg.n) * std::log(static_cast<double>(cfg.n));
      if (rec.entropy_after > cap + 1e-6) throw Error("entropy exceeded its cap");

      for (const auto& pairs : responses)
        for (auto [x, y] : pairs) g.add_edge(x, y);
      tr.iterations.push_back(rec);
    }
    if (result.status.empty()) {
      result.status = "batch_limit";
      if (tr.message.empty()) tr.message = "no cluster reached n/k' within the batch budget";
    }
  } catch (const BudgetExhausted& e) {
    result.status = "budget_exhausted";
    tr.message = e.what();
  } catch (const CoverInfeasible& e) {
    result.status = "cover_infeasible";
    tr.message = e.what();
  } catch (const PlayerRefused& e) {
    result.status = "player_refused";
    tr.message = e.what();
  } catch (const DegreeViolation& e) {
    result.status = "degree_violation";
    tr.message = e.what();
  } catch (const PreconditionViolated& e) {
    result.status = "precondition_violated";
    tr.message = e.what();
  }
  tr.status = result.status;
  return result;
}

// ---------------------------------------------------------------------------
// Transcript re-verification
// ---------------------------------------------------------------------------

/**
 * Re-checks the internal invariants of a serialized transcript: entropy chain
 * monotone, capped, and continuous; leak accounting cumulative; theorem flags
 * consistent with the recorded bound; final block consistent with the
 * configured thresholds.  Returns the first violation, or nullopt.
 */
inline std::optional<std::string> verify_transcript(const nlohmann::json& j) {
  try {
    if (j.at("schema_version").get<int>() != 1) return "unsupported schema_version";
    const int n = j.at("n").get<int>();
    const auto& config = j.at("config");
    const double cap = static_cast<double>(n) * std::log(static_cast<double>(n));
    const auto& iterations = j.at("iterations");
    double prev_after = 0.0;
    double prev_leak = 0.0;
    bool saw_exit = false;
    for (std::size_t i = 0; i < iterations.size(); ++i) {
      const auto& it = iterations[i];
      std::string at = " at iteration " + std::to_string(i + 1);
      if (it.at("iteration").get<int>() != static_cast<int>(i) + 1)
        return "iteration numbering broken" + at;
      double before = it.at("entropy_before").get<double>();
      double after = it.at("entropy_after").get<double>();
      if (std::abs(before - prev_after) > 1e-9) return "entropy chain broken" + at;
      if (after < before - 1e-9) return "entropy decreased" + at;
      if (after > cap + 1e-6) return "entropy exceeds the cap" + at;
      prev_after = after;
      double alpha = it.at("alpha").get<double>();
      if (alpha < -1e-9 || alpha > 1.0 + 1e-9) return "alpha out of range" + at;
      const auto& leak = it.at("leak");
      double ed = leak.at("ed").get<double>();
      double load0 = leak.at("load0").get<double>();
      double removed = leak.at("removed").get<double>();
      if (ed < -1e-9 || load0 < -1e-9 || removed < -1e-9)
        return "negative leak component" + at;
      double total_leak = ed + load0 + removed;
      if (total_leak < prev_leak - 1e-9) return "leak accounting decreased" + at;
      if (total_leak > static_cast<double>(n) + 1e-6) return "leaked mass exceeds the total" + at;
      prev_leak = total_leak;
      const auto& thm = it.at("thm");
      if (thm.at("applicable").get<bool>()) {
        bool satisfied = thm.at("satisfied").get<bool>();
        double bound = thm.at("bound").get<double>();
        double delta = it.at("delta_entropy").get<double>();
        if (satisfied != (delta + 1e-9 >= bound)) return "theorem flag inconsistent" + at;
      }
      if (it.at("exited").get<bool>()) {
        if (i + 1 != iterations.size()) return "exit recorded before the last iteration";
        saw_exit = true;
      }
    }
    const std::string status = j.at("status").get<std::string>();
    const auto& final_block = j.at("final");
    if (status == "completed") {
      if (final_block.is_null()) return "completed run without a final block";
      if (!saw_exit) return "completed run without an exit iteration";
      long long k_prime = config.at("kprime").get<long long>();
      long long cluster = final_block.at("cluster_size").get<long long>();
      if (cluster * k_prime < n) return "exit cluster below the threshold";
      int k2 = final_block.at("k2").get<int>();
      if (k2 > k_prime) return "final chunk count exceeds k'";
      int diameter = final_block.at("diameter").get<int>();
      int t = final_block.at("t").get<int>();
      if (final_block.at("diameter_ok").get<bool>() != (diameter >= 0 && diameter <= t))
        return "final diameter flag inconsistent";
      double eta = final_block.at("eta_bound").get<double>();
      double congestion = final_block.at("max_congestion").get<double>();
      if (final_block.at("congestion_ok").get<bool>() && congestion > eta + 1e-9)
        return "final congestion flag inconsistent";
      int b_used = final_block.at("b_used").get<int>();
      if (b_used > config.at("bmax").get<int>()) return "batch count exceeds the budget";
      if (b_used > static_cast<int>(iterations.size())) return "batch count exceeds iterations";
      long long max_degree = final_block.at("max_degree").get<long long>();
      long long degree_bound = final_block.at("degree_bound").get<long long>();
      long long load_max = 0;
      for (const auto& it : iterations)
        if (it.at("cuts_presented").get<int>() > 0)
          load_max = std::max(load_max, it.at("grouping").at("load").get<long long>());
      if (degree_bound !=
          b_used * load_max * (config.at("k").get<long long>() - 1) + static_cast<long long>(k2))
        return "final degree bound inconsistent";
      if (final_block.at("degree_ok").get<bool>() != (max_degree <= degree_bound))
        return "final degree flag inconsistent";
    } else if (!final_block.is_null()) {
      return "final block on a run that did not complete";
    }
    return std::nullopt;
  } catch (const nlohmann::json::exception& e) {
    return std::string("malformed transcript: ") + e.what();
  }
}

}  // namespace hopex
