#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "hopex/errors.hpp"

namespace hopex {

/**
 * Dense two-phase tableau simplex for small linear programs:
 *
 *   minimize c.x   subject to   A x (<= | ==) b,   x >= 0.
 *
 * Every row receives an artificial variable, which keeps phase 1 uniform and
 * lets us read the duals off the artificial columns at the end.  Dantzig
 * pricing with a Bland fallback once the objective stalls, so the solver
 * cannot cycle.  Intended for the routing master problems (hundreds of rows,
 * a few thousand columns), not for industrial use.
 */
class SimplexSolver {
 public:
  enum class Status { Optimal, Infeasible, Unbounded };

  struct Row {
    std::vector<std::pair<int, double>> coeffs;  // (variable, coefficient)
    bool is_equality = false;
    double rhs = 0.0;
  };

  struct Result {
    Status status = Status::Infeasible;
    double objective = 0.0;
    std::vector<double> x;      // structural variables
    std::vector<double> duals;  // one per row; reduced-cost convention,
                                // so duals of <= rows are <= 0 for minimization
  };

  SimplexSolver(int num_vars, std::vector<double> objective, std::vector<Row> rows)
      : n_(num_vars), c_(std::move(objective)), rows_(std::move(rows)) {
    if (static_cast<int>(c_.size()) != n_)
      throw PreconditionViolated("simplex: objective length mismatch");
  }

  Result solve() {
    const int m = static_cast<int>(rows_.size());
    // Column layout: [0,n) structural, [n, n+s) slacks, [n+s, n+s+m) artificials.
    int num_slacks = 0;
    for (const auto& row : rows_)
      if (!row.is_equality) ++num_slacks;
    const int slack0 = n_;
    const int art0 = n_ + num_slacks;
    const int cols = art0 + m;

    tab_.assign(static_cast<std::size_t>(m + 1),
                std::vector<double>(static_cast<std::size_t>(cols + 1), 0.0));
    basis_.assign(static_cast<std::size_t>(m), 0);

    int next_slack = slack0;
    for (int i = 0; i < m; ++i) {
      const Row& row = rows_[i];
      double sign = row.rhs < 0.0 ? -1.0 : 1.0;  // keep rhs nonnegative
      for (auto [var, coeff] : row.coeffs) {
        if (var < 0 || var >= n_) throw PreconditionViolated("simplex: variable out of range");
        tab_[i][static_cast<std::size_t>(var)] += sign * coeff;
      }
      if (!row.is_equality) tab_[i][static_cast<std::size_t>(next_slack++)] = sign * 1.0;
      tab_[i][static_cast<std::size_t>(art0 + i)] = 1.0;
      tab_[i][static_cast<std::size_t>(cols)] = sign * row.rhs;
      basis_[i] = art0 + i;
    }

    // Phase 1: minimize the sum of artificials.  Objective row holds reduced
    // costs; with the all-artificial basis they are -sum of constraint rows.
    for (int j = 0; j <= cols; ++j) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += tab_[i][static_cast<std::size_t>(j)];
      tab_[m][static_cast<std::size_t>(j)] = -s;
    }
    for (int i = 0; i < m; ++i) tab_[m][static_cast<std::size_t>(art0 + i)] = 0.0;

    if (!run(cols, art0, /*allow_artificial=*/true)) throw Error("simplex: phase 1 unbounded");
    if (tab_[m][static_cast<std::size_t>(cols)] < -kFeasTol) {
      Result r;
      r.status = Status::Infeasible;
      return r;
    }

    // Drive any artificial still basic (at value ~0) out of the basis when a
    // real pivot exists; rows that stay artificial are redundant.
    for (int i = 0; i < m; ++i) {
      if (basis_[i] < art0) continue;
      for (int j = 0; j < art0; ++j) {
        if (std::abs(tab_[i][static_cast<std::size_t>(j)]) > kPivotTol) {
          pivot(i, j);
          break;
        }
      }
    }

    // Phase 2: reduced costs for the real objective.
    for (int j = 0; j <= cols; ++j) {
      double r = (j < n_) ? c_[static_cast<std::size_t>(j)] : 0.0;
      if (j == cols) r = 0.0;
      for (int i = 0; i < m; ++i) {
        double cb = basis_[i] < n_ ? c_[static_cast<std::size_t>(basis_[i])] : 0.0;
        r -= cb * tab_[i][static_cast<std::size_t>(j)];
      }
      tab_[m][static_cast<std::size_t>(j)] = r;
    }

    Result r;
    if (!run(cols, art0, /*allow_artificial=*/false)) {
      r.status = Status::Unbounded;
      return r;
    }

    r.status = Status::Optimal;
    r.x.assign(static_cast<std::size_t>(n_), 0.0);
    for (int i = 0; i < m; ++i)
      if (basis_[i] < n_)
        r.x[static_cast<std::size_t>(basis_[i])] = tab_[i][static_cast<std::size_t>(cols)];
    r.objective = 0.0;
    for (int j = 0; j < n_; ++j)
      r.objective += c_[static_cast<std::size_t>(j)] * r.x[static_cast<std::size_t>(j)];
    // Dual of row i is read off the artificial column for row i (cost 0,
    // identity coefficient): reduced cost there equals -y_i.
    r.duals.assign(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
      double y = -tab_[m][static_cast<std::size_t>(art0 + i)];
      if (rows_[i].rhs < 0.0) y = -y;  // undo the row sign flip
      r.duals[static_cast<std::size_t>(i)] = y;
    }
    return r;
  }

 private:
  static constexpr double kPivotTol = 1e-9;
  static constexpr double kCostTol = 1e-9;
  static constexpr double kFeasTol = 1e-7;
  static constexpr long kMaxPivots = 200000;

  // Runs the simplex loop on the current objective row.  Returns false when
  // the problem is unbounded in the current phase.
  bool run(int cols, int art0, bool allow_artificial) {
    const int m = static_cast<int>(basis_.size());
    long stall = 0;
    // The objective cell holds -objective, so progress shows as an increase.
    double last_obj = -std::numeric_limits<double>::infinity();
    bool bland = false;
    for (long iter = 0; iter < kMaxPivots; ++iter) {
      int enter = -1;
      double best = -kCostTol;
      int limit = allow_artificial ? cols : art0;
      for (int j = 0; j < limit; ++j) {
        double rc = tab_[m][static_cast<std::size_t>(j)];
        if (rc < -kCostTol) {
          if (bland) {  // first eligible column
            enter = j;
            break;
          }
          if (rc < best) {
            best = rc;
            enter = j;
          }
        }
      }
      if (enter < 0) return true;  // optimal for this phase

      int leave = -1;
      double best_ratio = 0.0;
      for (int i = 0; i < m; ++i) {
        double a = tab_[i][static_cast<std::size_t>(enter)];
        if (a > kPivotTol) {
          double ratio = tab_[i][static_cast<std::size_t>(cols)] / a;
          if (leave < 0 || ratio < best_ratio - 1e-12 ||
              (std::abs(ratio - best_ratio) <= 1e-12 && basis_[i] < basis_[leave])) {
            leave = i;
            best_ratio = ratio;
          }
        }
      }
      if (leave < 0) return false;  // unbounded direction

      pivot(leave, enter);

      double obj = tab_[m][static_cast<std::size_t>(cols)];
      if (obj > last_obj + 1e-12) {
        last_obj = obj;
        stall = 0;
      } else if (++stall > 300) {
        bland = true;  // degenerate stretch; switch to Bland to rule out cycling
      }
    }
    throw Error("simplex: pivot limit exceeded");
  }

  void pivot(int row, int col) {
    const int m = static_cast<int>(basis_.size());
    const std::size_t width = tab_[0].size();
    double p = tab_[row][static_cast<std::size_t>(col)];
    for (std::size_t j = 0; j < width; ++j) tab_[row][j] /= p;
    tab_[row][static_cast<std::size_t>(col)] = 1.0;
    for (int i = 0; i <= m; ++i) {
      if (i == row) continue;
      double f = tab_[i][static_cast<std::size_t>(col)];
      if (f == 0.0) continue;
      double* target = tab_[static_cast<std::size_t>(i)].data();
      const double* source = tab_[static_cast<std::size_t>(row)].data();
      for (std::size_t j = 0; j < width; ++j) target[j] -= f * source[j];
      tab_[i][static_cast<std::size_t>(col)] = 0.0;
    }
    basis_[row] = col;
  }

  int n_;
  std::vector<double> c_;
  std::vector<Row> rows_;
  std::vector<std::vector<double>> tab_;
  std::vector<int> basis_;
};

}  // namespace hopex
