#include "scenver/analysis.hpp"

#include <cmath>

namespace scenver {

double AccelerationCertificate::bound(long k) const {
  return 1.0 - std::pow(1.0 - epsilon, static_cast<double>(k));
}

ForwardResult forward_worst_case(const Summary& c, const AffinePredicate& pre) {
  LpSolution sol = maximize_over_simplex(c.b(), pre);
  if (sol.status == LpStatus::Infeasible) throw VacuousPrecondition();
  return {sol.value, std::move(sol.witness)};
}

AffinePredicate backward_weakest_precondition(const Summary& c, double epsilon) {
  if (epsilon < 0.0 || epsilon > 1.0) throw ModelError("epsilon outside [0,1]");
  return AffinePredicate{{AffineConstraint{c.b(), epsilon}}};
}

std::map<std::string, double> point_distribution_error_map(
    const Summary& c, const std::vector<std::string>& labels) {
  if (static_cast<int>(labels.size()) != c.size())
    throw DimensionMismatch("label list does not match summary dimension");
  std::map<std::string, double> out;
  for (int i = 0; i < c.size(); ++i) out[labels[i]] = c.b()[i];
  return out;
}

AssertionVerdict check_assertion(const HoareAssertion& a) {
  if (a.epsilon < 0.0 || a.epsilon > 1.0) throw ModelError("epsilon outside [0,1]");
  const int n = a.summary.size();
  AssertionVerdict v;
  if (!is_feasible(a.pre, n)) {
    v.holds = true;
    v.vacuous = true;
    return v;
  }
  // Obligation (i): error probability bound.
  {
    LpSolution sol = maximize_over_simplex(a.summary.b(), a.pre);
    if (sol.value > a.epsilon + kEntailTol) {
      v.holds = false;
      v.violated_obligation = Obligation::ErrorBound;
      v.violation_value = sol.value;
      v.counterexample = std::move(sol.witness);
      return v;
    }
  }
  // Obligation (ii): each postcondition constraint, multiplied through by the
  // survivor mass 1 - x.b.
  for (size_t j = 0; j < a.post.constraints.size(); ++j) {
    const auto& con = a.post.constraints[j];
    if (con.a.size() != n) throw DimensionMismatch("postcondition dimension mismatch");
    Vec coeff = a.summary.a() * con.a + con.theta * a.summary.b();
    LpSolution sol = maximize_over_simplex(coeff, a.pre);
    if (sol.value > con.theta + kEntailTol) {
      v.holds = false;
      v.violated_obligation = Obligation::Postcondition;
      v.violated_constraint = static_cast<int>(j);
      v.violation_value = sol.value;
      v.counterexample = std::move(sol.witness);
      return v;
    }
  }
  v.holds = true;
  return v;
}

double rule1_compose(double eps1, double eps2) {
  if (eps1 < 0.0 || eps1 > 1.0 || eps2 < 0.0 || eps2 > 1.0)
    throw ModelError("epsilon outside [0,1]");
  return 1.0 - (1.0 - eps1) * (1.0 - eps2);
}

AccelerationCertificate accelerate(const std::vector<Summary>& summaries,
                                   const AffinePredicate& phi, double epsilon) {
  if (summaries.empty()) throw ModelError("accelerate needs at least one summary");
  for (size_t i = 0; i < summaries.size(); ++i) {
    AssertionVerdict v = check_assertion({phi, summaries[i], phi, epsilon});
    if (!v.holds) throw PremiseFailed(static_cast<int>(i), std::move(v));
  }
  return AccelerationCertificate{summaries, phi, epsilon, true};
}

double trivial_epsilon(const std::vector<Summary>& summaries) {
  if (summaries.empty()) throw ModelError("trivial_epsilon needs at least one summary");
  double eps = 0.0;
  for (const Summary& s : summaries)
    if (s.size() > 0) eps = std::max(eps, s.b().maxCoeff());
  return eps;
}

std::optional<std::pair<AffinePredicate, double>> find_invariant(
    const std::vector<Summary>& summaries, const std::vector<double>& eps_grid) {
  if (summaries.empty()) throw ModelError("find_invariant needs at least one summary");
  const int n = summaries.front().size();
  for (double eps : eps_grid) {
    if (eps < 0.0 || eps > 1.0) throw ModelError("grid epsilon outside [0,1]");
    AffinePredicate phi;
    for (const Summary& s : summaries) phi.constraints.push_back({s.b(), eps});
    if (!is_feasible(phi, n)) continue;
    bool all_hold = true;
    for (const Summary& s : summaries) {
      if (!check_assertion({phi, s, phi, eps}).holds) {
        all_hold = false;
        break;
      }
    }
    if (all_hold) return std::make_pair(std::move(phi), eps);
  }
  return std::nullopt;
}

std::vector<double> default_eps_grid() {
  std::vector<double> grid;
  grid.reserve(100);
  for (int i = 0; i < 100; ++i) grid.push_back(i / 100.0);
  return grid;
}

InterleavingResult worst_case_interleaving(const std::vector<Summary>& summaries,
                                           const AffinePredicate& phi, int k) {
  const int m = static_cast<int>(summaries.size());
  if (m < 1 || k < 1) throw ModelError("interleaving needs m >= 1 and k >= 1");
  double count = std::pow(static_cast<double>(m), k);
  if (count > 1e6) throw BudgetExceeded("m^k exceeds the 1e6 interleaving budget");

  InterleavingResult best;
  best.value = -1.0;
  std::vector<int> seq(k, 0);
  // Lexicographic enumeration; strict improvement keeps the smallest argmax.
  while (true) {
    Summary composed = summaries[seq[0]];
    for (int i = 1; i < k; ++i) composed = compose(composed, summaries[seq[i]]);
    ForwardResult fr = forward_worst_case(composed, phi);
    if (fr.value > best.value + 1e-12) {
      best.value = fr.value;
      best.sequence = seq;
      best.witness = std::move(fr.witness);
    }
    int pos = k - 1;
    while (pos >= 0 && seq[pos] == m - 1) seq[pos--] = 0;
    if (pos < 0) break;
    ++seq[pos];
  }
  return best;
}

}  // namespace scenver
