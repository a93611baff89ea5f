#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hopex/errors.hpp"
#include "hopex/mixing.hpp"
#include "hopex/pseudo.hpp"

namespace hopex {

struct WarmupResult {
  int n = 0;
  int k = 0;
  int iterations = 0;                // = log_k(n)
  std::vector<double> delta_entropy; // per-iteration gain; each equals n * ln k
  double final_entropy = 0.0;
  double entropy_cap = 0.0;  // n * ln n, reached exactly
};

/**
 * The digit-aligned warm-up: n = k^m vertices, and in iteration i every
 * vertex is matched to the k-1 vertices that differ from it only in the i-th
 * base-k digit.  The closed neighborhoods are then the digit rows, the
 * two-step mix averages each commodity over its row, and every iteration
 * gains exactly n * ln k of entropy until the commodities are uniform after
 * m iterations.
 */
inline WarmupResult run_warmup(int n, int k) {
  if (k < 2) throw PreconditionViolated("warm-up needs k >= 2");
  int m = 0;
  long long power = 1;
  while (power < n) {
    power *= k;
    ++m;
  }
  if (power != n) throw PreconditionViolated("warm-up needs n to be a power of k");

  WarmupResult result;
  result.n = n;
  result.k = k;
  result.iterations = m;
  result.entropy_cap = static_cast<double>(n) * std::log(static_cast<double>(n));

  std::vector<std::vector<double>> columns(
      static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int c = 0; c < n; ++c) columns[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)] = 1.0;
  auto total_entropy = [&]() {
    double h = 0.0;
    for (const auto& col : columns)
      for (double u : col) h += entropy_term(u);
    return h;
  };

  double before = total_entropy();
  long long base = 1;
  for (int i = 0; i < m; ++i, base *= k) {
    std::vector<std::vector<int>> mixers;
    mixers.reserve(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
      long long digit = (v / base) % k;
      long long row_start = v - digit * base;
      std::vector<int> row;
      row.reserve(static_cast<std::size_t>(k));
      for (int d = 0; d < k; ++d) row.push_back(static_cast<int>(row_start + d * base));
      mixers.push_back(std::move(row));
    }
    auto sys = MixerSystem::from_mixers(n, mixers);
    for (auto& col : columns) col = mix(col, sys);
    double after = total_entropy();
    result.delta_entropy.push_back(after - before);
    before = after;
  }
  result.final_entropy = before;
  return result;
}

}  // namespace hopex
