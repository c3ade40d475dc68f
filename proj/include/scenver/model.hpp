#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace scenver {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Tolerance for row-stochasticity and distribution checks.
inline constexpr double kStochasticTol = 1e-9;
/// Below this total mass a subdistribution cannot be renormalized.
inline constexpr double kVanishingMassTol = 1e-12;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a contingency matrix has a state with no samples.
class ZeroRowTotal : public ModelError {
 public:
  explicit ZeroRowTotal(const std::string& state)
      : ModelError("state '" + state + "' has zero sample count"), state(state) {}
  std::string state;
};

/// Thrown when renormalizing a subdistribution whose mass is (numerically) zero.
class VanishingMass : public ModelError {
 public:
  VanishingMass() : ModelError("subdistribution mass below 1e-12; all mass lost to error") {}
};

class DomainMismatch : public ModelError {
 public:
  using ModelError::ModelError;
};

class DimensionMismatch : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Ordered state labels with a distinguished absorbing error state.
/// The error state is always stored at the last index, so the non-error
/// block of any transition matrix is a contiguous leading slice.
struct StateSpace {
  std::vector<std::string> labels;

  int num_states() const { return static_cast<int>(labels.size()); }
  int num_nonerror() const { return num_states() - 1; }
  int error_index() const { return num_states() - 1; }

  /// Index of a label, or -1 when absent.
  int index_of(const std::string& label) const;

  static StateSpace with_error(std::vector<std::string> nonerror_labels,
                               std::string error_label = "err");

  /// Throws ModelError if labels are empty, duplicated, or there is no room
  /// for an error state.
  void validate() const;
};

/// Probability distribution over the non-error states.
struct Distribution {
  Vec weights;

  /// Validates non-negativity and unit mass (tolerance 1e-9); throws ModelError.
  static Distribution checked(Vec weights);
};

/// Non-negative weights with total mass at most 1; the deficit is mass
/// already absorbed by the error state.
struct SubDistribution {
  Vec weights;

  double mass() const { return weights.sum(); }
  static SubDistribution checked(Vec weights);
};

/// norm(x) = x / |x|. Throws VanishingMass when |x| <= 1e-12.
Distribution normalize_subdistribution(const SubDistribution& x);

/// Raw (state, estimate) counts for one environment condition.
struct ContingencyMatrix {
  std::vector<std::string> states;     // non-error states, row order
  std::vector<std::string> estimates;  // estimate space Y, column order
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> counts;

  void validate() const;  // shape and non-negativity; throws ModelError
};

/// Row-normalized perception model: probs(s, y) is the probability the
/// perception component outputs estimate y when the true state is s.
/// Stored sparse; rows of synthetic models may be dense but case-study
/// builders bypass materialization (see cases.hpp).
struct PerceptionAbstraction {
  SpMat probs;  // |S_nonerr| x |Y|

  int num_states() const { return static_cast<int>(probs.rows()); }
  int num_estimates() const { return static_cast<int>(probs.cols()); }

  static PerceptionAbstraction identity(int n);
  void validate() const;  // each row a distribution; throws ModelError
};

/// alpha(s)(y) = counts(s,y) / row_total(s). Throws ZeroRowTotal.
PerceptionAbstraction normalize_counts(const ContingencyMatrix& cm);

/// Controller g : E x Y -> U as a label table, JSON-loadable.
struct ControllerTable {
  // env -> estimate label -> control label
  std::map<std::string, std::map<std::string, std::string>> entries;

  const std::string& control(const std::string& env, const std::string& estimate) const;
};

/// Dynamics f : E x S x U -> S as a label table. The error state must map to
/// itself under every control.
struct DynamicsTable {
  // env -> (state label, control label) -> successor label
  std::map<std::string, std::map<std::pair<std::string, std::string>, std::string>> entries;

  const std::string& successor(const std::string& env, const std::string& state,
                               const std::string& control) const;
};

/// Closed-loop system as a right-stochastic matrix over `space`, error row
/// absorbing.
struct ClosedLoopDtmc {
  StateSpace space;
  SpMat transitions;  // n x n, rows sum to 1

  int num_states() const { return space.num_states(); }
};

/// Chains keyed by environment condition id.
using ChainMap = std::map<std::string, ClosedLoopDtmc>;

struct DtmcViolation {
  enum Kind { RowSumViolation, NegativeEntry, NotAbsorbing, ShapeMismatch };
  Kind kind;
  int row;
  double value;
  std::string describe() const;
};

/// Empty iff every ClosedLoopDtmc invariant holds. Violations are data.
std::vector<DtmcViolation> validate_dtmc(const ClosedLoopDtmc& m);

/// Index-level controller/dynamics used by the composition kernel.
/// ControllerFn maps an estimate index to an opaque control id;
/// DynamicsFn maps (non-error state index, control id) to a successor state
/// index in `space` (possibly the error index).
using ControllerFn = std::function<int(int estimate)>;
using DynamicsFn = std::function<int(int state, int control)>;

/// P(s,s') = sum_y alpha(s)(y) [f(s, g(y)) = s'], error row absorbing.
ClosedLoopDtmc compose_closed_loop(const StateSpace& space, const PerceptionAbstraction& alpha,
                                   const ControllerFn& g, const DynamicsFn& f);

/// Label-table convenience overload for one environment. Estimate space is
/// given by `estimates` (column order of alpha). Throws DomainMismatch when a
/// table lookup falls outside the declared domain.
ClosedLoopDtmc compose_closed_loop(const StateSpace& space,
                                   const std::vector<std::string>& estimates,
                                   const PerceptionAbstraction& alpha, const ControllerTable& g,
                                   const DynamicsTable& f, const std::string& env);

}  // namespace scenver
