#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scenver/linprog.hpp"
#include "scenver/summary.hpp"

namespace scenver {

class VacuousPrecondition : public ModelError {
 public:
  VacuousPrecondition() : ModelError("precondition is infeasible over the simplex") {}
};

class BudgetExceeded : public ModelError {
 public:
  using ModelError::ModelError;
};

/// {phi} C {psi} {epsilon}: every initial distribution satisfying phi incurs
/// error probability at most epsilon and a normalized survivor distribution
/// satisfying psi.
struct HoareAssertion {
  AffinePredicate pre;
  Summary summary;
  AffinePredicate post;
  double epsilon = 0.0;
};

enum class Obligation { ErrorBound, Postcondition };

struct AssertionVerdict {
  bool holds = false;
  bool vacuous = false;  // pre is infeasible; holds trivially
  std::optional<Vec> counterexample;
  Obligation violated_obligation = Obligation::ErrorBound;
  int violated_constraint = -1;  // index into post.constraints when relevant
  double violation_value = 0.0;  // LP maximum of the violated linear form
};

struct AccelerationCertificate {
  std::vector<Summary> summaries;
  AffinePredicate invariant;
  double epsilon = 0.0;
  bool premise_checked = false;

  /// 1 - (1 - epsilon)^k, valid for every interleaving of length k.
  double bound(long k) const;
};

class PremiseFailed : public ModelError {
 public:
  PremiseFailed(int index, AssertionVerdict verdict)
      : ModelError("acceleration premise failed for summary " + std::to_string(index)),
        index(index),
        verdict(std::move(verdict)) {}
  int index;
  AssertionVerdict verdict;
};

struct ForwardResult {
  double value = 0.0;
  Vec witness;
};

/// max x . b over pre intersected with the simplex.
/// Throws VacuousPrecondition when pre is infeasible.
ForwardResult forward_worst_case(const Summary& c, const AffinePredicate& pre);

/// Weakest precondition guaranteeing error probability <= epsilon: x . b <= epsilon.
AffinePredicate backward_weakest_precondition(const Summary& c, double epsilon);

/// Per-state error probability map (exactly b, keyed by label).
std::map<std::string, double> point_distribution_error_map(const Summary& c,
                                                           const std::vector<std::string>& labels);

/// Checks {phi}C{psi}{eps}. The postcondition obligation psi(norm(xA)) is
/// multiplied through by 1 - x.b, turning each affine constraint (a_j, theta_j)
/// into the linear obligation x . (A a_j + theta_j b) <= theta_j.
AssertionVerdict check_assertion(const HoareAssertion& a);

/// Sequential composition bound: 1 - (1 - eps1)(1 - eps2).
double rule1_compose(double eps1, double eps2);

/// Checks the premise {phi}C_i{phi}{eps} for each summary; on success the
/// certificate bound 1-(1-eps)^k covers every interleaving of length k.
/// Throws PremiseFailed with the failing index and counterexample.
AccelerationCertificate accelerate(const std::vector<Summary>& summaries,
                                   const AffinePredicate& phi, double epsilon);

/// eps = max_i ||b_i||_inf; with phi = top this always satisfies the premise.
double trivial_epsilon(const std::vector<Summary>& summaries);

/// For each eps in the grid (ascending): phi_eps = /\_i { x . b_i <= eps };
/// returns the first (phi_eps, eps) that is feasible and makes every premise
/// {phi_eps}C_i{phi_eps}{eps} hold.
std::optional<std::pair<AffinePredicate, double>> find_invariant(
    const std::vector<Summary>& summaries, const std::vector<double>& eps_grid);

/// Default grid {0.00, 0.01, ..., 0.99}.
std::vector<double> default_eps_grid();

struct InterleavingResult {
  double value = 0.0;
  std::vector<int> sequence;  // argmax interleaving, lexicographically smallest
  Vec witness;
};

/// Brute force over all m^k interleavings of the given summaries: compose in
/// order and take the worst forward error under phi. Guard: m^k <= 1e6.
InterleavingResult worst_case_interleaving(const std::vector<Summary>& summaries,
                                           const AffinePredicate& phi, int k);

}  // namespace scenver
