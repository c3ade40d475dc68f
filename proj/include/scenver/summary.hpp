#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "scenver/model.hpp"

namespace scenver {

class UnknownEnvironment : public ModelError {
 public:
  explicit UnknownEnvironment(const std::string& env)
      : ModelError("no chain for environment '" + env + "'"), env(env) {}
  std::string env;
};

/// One stretch of operation: H timesteps under environment condition `env`.
struct Scenario {
  std::string env;
  int horizon = 1;
};

struct ScenarioSequence {
  std::vector<Scenario> items;
};

/// Block form of the H-step transition matrix: A is the non-error block,
/// b the error-absorption column. Rows satisfy sum_j A(i,j) + b(i) = 1.
class Summary {
 public:
  Summary(SpMat a, Vec b);
  static Summary identity(int n);

  int size() const { return static_cast<int>(b_.size()); }
  const SpMat& a() const { return a_; }
  const Vec& b() const { return b_; }
  double a_entry(int i, int j) const { return a_.coeff(i, j); }
  Mat a_dense() const { return Mat(a_); }

  /// Throws ModelError if entries leave [0,1] or rows do not conserve mass.
  void validate() const;

 private:
  SpMat a_;
  Vec b_;
};

/// (A, b) of the H-th power of the chain's transition matrix, by iterated
/// sparse multiplication (square-and-multiply for H >= 32).
Summary summarize(const ClosedLoopDtmc& m, int horizon);

/// Sequential composition: (A1 A2, b1 + A1 b2). Throws DimensionMismatch.
Summary compose(const Summary& c1, const Summary& c2);

/// Left-to-right fold of compose over per-scenario summaries.
Summary summarize_sequence(const ScenarioSequence& seq, const ChainMap& chains);

/// error_prob = x . b, survivors = x A (a subdistribution of mass 1 - error_prob).
std::pair<double, SubDistribution> apply(const Summary& c, const Distribution& x);

/// The composed b column of a scenario sequence, computed by backward vector
/// propagation without forming any A block. Entry i is the probability of
/// hitting the error state when starting from non-error state i.
Vec sequence_error_probabilities(const ScenarioSequence& seq, const ChainMap& chains);

}  // namespace scenver
