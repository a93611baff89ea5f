#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "hopex/errors.hpp"

namespace hopex {

// Absolute slack accepted when validating that values lie in [0,1] and that
// split plans reproduce their source entries.
inline constexpr double kConstructionTol = 1e-12;

// Entropy contribution of a single entry, with 0 ln 0 := 0.  Natural log
// throughout; every entropy figure in this library is in nats.
inline double entropy_term(double u) { return u <= 0.0 ? 0.0 : -u * std::log(u); }

/**
 * A pseudo-distribution: finitely many values in [0,1] indexed 0..count-1.
 * Unlike a probability distribution the values need not sum to 1; the sum is
 * the "size" and is preserved by the mixing operations built on top.
 */
class PseudoDistribution {
 public:
  PseudoDistribution() = default;

  explicit PseudoDistribution(std::vector<double> values) : values_(std::move(values)) {
    double sum = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      double v = values_[i];
      if (v < -kConstructionTol || v > 1.0 + kConstructionTol)
        throw OverflowedEntry("pseudo-distribution entry " + std::to_string(i) +
                              " = " + std::to_string(v) + " outside [0,1]");
      if (v < 0.0) v = 0.0;
      if (v > 1.0) v = 1.0;
      values_[i] = v;
      sum += v;
    }
    size_ = sum;
  }

  std::size_t count() const { return values_.size(); }
  double value(std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  // Total mass (cached at construction).
  double size() const { return size_; }

 private:
  std::vector<double> values_;
  double size_ = 0.0;
};

inline double entropy(const PseudoDistribution& p) {
  double h = 0.0;
  for (double v : p.values()) h += entropy_term(v);
  return h;
}

/**
 * Replacement of each entry by a list of nonnegative parts.  parts[i] must sum
 * to p(i) (within construction tolerance); at least one part per entry so the
 * plan covers the whole distribution.
 */
struct SplitPlan {
  std::vector<std::vector<double>> parts;
};

/**
 * Grouping of indices into disjoint sets covering 0..count-1; merging sums
 * each group into one entry.
 */
struct MergePartition {
  std::vector<std::vector<std::size_t>> groups;
};

// Split p according to plan.  The result lists the parts of entry 0 first,
// then entry 1, and so on, which is the layout split_partition() inverts.
inline PseudoDistribution split(const PseudoDistribution& p, const SplitPlan& plan) {
  if (plan.parts.size() != p.count())
    throw InconsistentPlan("split plan covers " + std::to_string(plan.parts.size()) +
                           " entries, distribution has " + std::to_string(p.count()));
  std::vector<double> out;
  for (std::size_t i = 0; i < p.count(); ++i) {
    const auto& parts = plan.parts[i];
    if (parts.empty())
      throw InconsistentPlan("split plan has no parts for entry " + std::to_string(i));
    double sum = 0.0;
    for (double part : parts) {
      if (part < -kConstructionTol)
        throw InconsistentPlan("negative part for entry " + std::to_string(i));
      sum += part;
    }
    if (std::abs(sum - p.value(i)) > kConstructionTol)
      throw InconsistentPlan("parts of entry " + std::to_string(i) + " sum to " +
                             std::to_string(sum) + ", expected " +
                             std::to_string(p.value(i)));
    for (double part : parts) out.push_back(part < 0.0 ? 0.0 : part);
  }
  return PseudoDistribution(std::move(out));
}

// The partition that undoes split(p, plan): group j collects the part indices
// that came from source entry j.
inline MergePartition split_partition(const SplitPlan& plan) {
  MergePartition partition;
  std::size_t next = 0;
  for (const auto& parts : plan.parts) {
    std::vector<std::size_t> group(parts.size());
    for (std::size_t& g : group) g = next++;
    partition.groups.push_back(std::move(group));
  }
  return partition;
}

// Merge groups of entries of q into single entries, in group order.
inline PseudoDistribution merge(const PseudoDistribution& q, const MergePartition& partition) {
  std::vector<char> seen(q.count(), 0);
  std::vector<double> out;
  out.reserve(partition.groups.size());
  for (const auto& group : partition.groups) {
    double sum = 0.0;
    for (std::size_t i : group) {
      if (i >= q.count() || seen[i])
        throw InconsistentPlan("merge partition is not a partition of the support");
      seen[i] = 1;
      sum += q.value(i);
    }
    if (sum > 1.0 + kConstructionTol)
      throw OverflowedEntry("merged entry has mass " + std::to_string(sum) + " > 1");
    out.push_back(sum);
  }
  for (char s : seen)
    if (!s) throw InconsistentPlan("merge partition misses indices of the support");
  return PseudoDistribution(std::move(out));
}

}  // namespace hopex
