#pragma once

#include <vector>

#include "scenver/model.hpp"

namespace scenver {

/// Feasibility tolerance for LP witnesses.
inline constexpr double kLpFeasTol = 1e-7;
/// Slack added to entailment comparisons, decoupled from solver noise.
inline constexpr double kEntailTol = 1e-9;

/// One affine constraint x . a <= theta over the non-error simplex.
struct AffineConstraint {
  Vec a;
  double theta = 0.0;
};

/// Conjunction of affine constraints; the empty list is the vacuous
/// precondition (all of the simplex).
struct AffinePredicate {
  std::vector<AffineConstraint> constraints;

  bool is_top() const { return constraints.empty(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  Vec witness;
};

/// max c . x  subject to  G x <= h, x >= 0. Dense two-phase simplex with
/// Bland's rule; deterministic tie-breaking by lowest index.
LpSolution simplex_maximize(const Vec& c, const Mat& g, const Vec& h);

/// max objective . x over { x : pred(x), x >= 0, sum x = 1 }.
/// Never returns Unbounded (the feasible set is compact).
LpSolution maximize_over_simplex(const Vec& objective, const AffinePredicate& pred);

/// True iff pred intersected with the simplex is nonempty.
bool is_feasible(const AffinePredicate& pred, int dim);

/// True iff every simplex point satisfying pred has x . coeff <= offset + 1e-9
/// (vacuously true when pred is infeasible).
bool entails(const AffinePredicate& pred, const Vec& coeff, double offset);

}  // namespace scenver
