#include "scenver/linprog.hpp"

#include <cmath>
#include <limits>

namespace scenver {

namespace {

constexpr double kPivotTol = 1e-10;

// Tableau for max problems in canonical form. Columns: structural vars,
// slacks, artificials, with the right-hand side kept separately.
struct Tableau {
  Mat t;               // m x ncols
  Vec rhs;             // m
  std::vector<int> basis;
  int n = 0;           // structural
  int m = 0;           // rows
  int ncols = 0;

  // Reduced profit of column j under cost vector `cost` (maximize).
  // d_j = cost_j - sum_i cost[basis_i] * t(i, j).
  Vec reduced(const Vec& cost) const {
    Vec d = cost;
    for (int i = 0; i < m; ++i) {
      double cb = cost[basis[i]];
      if (cb != 0.0) d -= cb * t.row(i).transpose();
    }
    return d;
  }

  double objective(const Vec& cost) const {
    double z = 0.0;
    for (int i = 0; i < m; ++i) z += cost[basis[i]] * rhs[i];
    return z;
  }

  void pivot(int row, int col) {
    double p = t(row, col);
    t.row(row) /= p;
    rhs[row] /= p;
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      double factor = t(i, col);
      if (factor != 0.0) {
        t.row(i) -= factor * t.row(row);
        rhs[i] -= factor * rhs[row];
      }
    }
    basis[row] = col;
  }

  // Bland's rule: entering column is the lowest index with positive reduced
  // profit; leaving row is the min-ratio row, ties broken by lowest basic
  // variable index. Returns false on optimality, throws on unbounded.
  enum class StepResult { Optimal, Pivoted, Unbounded };

  StepResult step(const Vec& cost, int max_enterable) {
    Vec d = reduced(cost);
    int enter = -1;
    for (int j = 0; j < max_enterable; ++j)
      if (d[j] > kPivotTol) {
        enter = j;
        break;
      }
    if (enter < 0) return StepResult::Optimal;
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (t(i, enter) > kPivotTol) {
        double ratio = rhs[i] / t(i, enter);
        if (ratio < best_ratio - kPivotTol ||
            (ratio < best_ratio + kPivotTol && (leave < 0 || basis[i] < basis[leave]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) return StepResult::Unbounded;
    pivot(leave, enter);
    return StepResult::Pivoted;
  }
};

}  // namespace

LpSolution simplex_maximize(const Vec& c, const Mat& g, const Vec& h) {
  const int m = static_cast<int>(g.rows());
  const int n = static_cast<int>(g.cols());
  const int num_art = static_cast<int>((h.array() < 0.0).count());

  Tableau tab;
  tab.n = n;
  tab.m = m;
  tab.ncols = n + m + num_art;
  tab.t = Mat::Zero(m, tab.ncols);
  tab.rhs = Vec::Zero(m);
  tab.basis.resize(m);

  int art = n + m;
  for (int i = 0; i < m; ++i) {
    if (h[i] >= 0.0) {
      tab.t.row(i).head(n) = g.row(i);
      tab.t(i, n + i) = 1.0;
      tab.rhs[i] = h[i];
      tab.basis[i] = n + i;
    } else {
      // Flip the row so the right-hand side is non-negative; the slack
      // becomes -1 and an artificial variable carries the initial basis.
      tab.t.row(i).head(n) = -g.row(i);
      tab.t(i, n + i) = -1.0;
      tab.t(i, art) = 1.0;
      tab.rhs[i] = -h[i];
      tab.basis[i] = art;
      ++art;
    }
  }

  const long iteration_cap = 4096L + 64L * static_cast<long>(tab.ncols);

  if (num_art > 0) {
    // Phase 1: maximize -(sum of artificials).
    Vec cost1 = Vec::Zero(tab.ncols);
    cost1.tail(num_art).setConstant(-1.0);
    for (long it = 0;; ++it) {
      if (it > iteration_cap) throw ModelError("simplex phase 1 exceeded iteration cap");
      auto r = tab.step(cost1, tab.ncols);
      if (r == Tableau::StepResult::Optimal) break;
      if (r == Tableau::StepResult::Unbounded)
        throw ModelError("simplex phase 1 unbounded");  // cannot happen
    }
    if (tab.objective(cost1) < -kLpFeasTol) return {LpStatus::Infeasible, 0.0, {}};
    // Drive remaining artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
      if (tab.basis[i] >= n + m) {
        for (int j = 0; j < n + m; ++j)
          if (std::abs(tab.t(i, j)) > kPivotTol) {
            tab.pivot(i, j);
            break;
          }
        // A row still basic in an artificial is redundant; its rhs is ~0 and
        // the artificial stays at zero because phase 2 cannot enter it.
      }
    }
  }

  // Phase 2: original objective, artificial columns barred from entering.
  Vec cost2 = Vec::Zero(tab.ncols);
  cost2.head(n) = c;
  for (long it = 0;; ++it) {
    if (it > iteration_cap) throw ModelError("simplex phase 2 exceeded iteration cap");
    auto r = tab.step(cost2, n + m);
    if (r == Tableau::StepResult::Optimal) break;
    if (r == Tableau::StepResult::Unbounded) return {LpStatus::Unbounded, 0.0, {}};
  }

  Vec x = Vec::Zero(n);
  for (int i = 0; i < m; ++i)
    if (tab.basis[i] < n) x[tab.basis[i]] = tab.rhs[i];
  return {LpStatus::Optimal, c.dot(x), std::move(x)};
}

LpSolution maximize_over_simplex(const Vec& objective, const AffinePredicate& pred) {
  const int n = static_cast<int>(objective.size());
  const int d = static_cast<int>(pred.constraints.size());
  Mat g(d + 2, n);
  Vec h(d + 2);
  for (int i = 0; i < d; ++i) {
    if (pred.constraints[i].a.size() != n)
      throw DimensionMismatch("predicate constraint dimension mismatch");
    g.row(i) = pred.constraints[i].a.transpose();
    h[i] = pred.constraints[i].theta;
  }
  // sum x = 1 as a pair of inequalities.
  g.row(d).setOnes();
  h[d] = 1.0;
  g.row(d + 1).setConstant(-1.0);
  h[d + 1] = -1.0;
  LpSolution sol = simplex_maximize(objective, g, h);
  if (sol.status == LpStatus::Unbounded)
    throw ModelError("simplex-constrained LP reported unbounded");
  return sol;
}

bool is_feasible(const AffinePredicate& pred, int dim) {
  LpSolution sol = maximize_over_simplex(Vec::Zero(dim), pred);
  return sol.status == LpStatus::Optimal;
}

bool entails(const AffinePredicate& pred, const Vec& coeff, double offset) {
  LpSolution sol = maximize_over_simplex(coeff, pred);
  if (sol.status == LpStatus::Infeasible) return true;
  return sol.value <= offset + kEntailTol;
}

}  // namespace scenver
