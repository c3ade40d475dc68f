#include "scenver/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace scenver {

int StateSpace::index_of(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

StateSpace StateSpace::with_error(std::vector<std::string> nonerror_labels,
                                  std::string error_label) {
  nonerror_labels.push_back(std::move(error_label));
  StateSpace space{std::move(nonerror_labels)};
  space.validate();
  return space;
}

void StateSpace::validate() const {
  if (labels.size() < 2) throw ModelError("state space needs at least one non-error state");
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (l.empty()) throw ModelError("empty state label");
    if (!seen.insert(l).second) throw ModelError("duplicate state label '" + l + "'");
  }
}

Distribution Distribution::checked(Vec weights) {
  double total = 0.0;
  for (int i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) throw ModelError("negative weight in distribution");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > kStochasticTol)
    throw ModelError("distribution mass " + std::to_string(total) + " != 1");
  return Distribution{std::move(weights)};
}

SubDistribution SubDistribution::checked(Vec weights) {
  double total = 0.0;
  for (int i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) throw ModelError("negative weight in subdistribution");
    total += weights[i];
  }
  if (total > 1.0 + kStochasticTol)
    throw ModelError("subdistribution mass " + std::to_string(total) + " > 1");
  return SubDistribution{std::move(weights)};
}

Distribution normalize_subdistribution(const SubDistribution& x) {
  const double total = x.mass();
  if (total <= kVanishingMassTol) throw VanishingMass();
  return Distribution{x.weights / total};
}

void ContingencyMatrix::validate() const {
  if (counts.rows() != static_cast<long>(states.size()) ||
      counts.cols() != static_cast<long>(estimates.size()))
    throw ModelError("contingency matrix shape does not match label lists");
  if (states.empty() || estimates.empty()) throw ModelError("empty contingency matrix");
  for (long i = 0; i < counts.rows(); ++i)
    for (long j = 0; j < counts.cols(); ++j)
      if (counts(i, j) < 0) throw ModelError("negative count at (" + states[i] + ", " + estimates[j] + ")");
}

PerceptionAbstraction PerceptionAbstraction::identity(int n) {
  SpMat probs(n, n);
  probs.setIdentity();
  return PerceptionAbstraction{std::move(probs)};
}

void PerceptionAbstraction::validate() const {
  for (int i = 0; i < probs.outerSize(); ++i) {
    double total = 0.0;
    for (SpMat::InnerIterator it(probs, i); it; ++it) {
      if (it.value() < 0.0) throw ModelError("negative probability in abstraction row " + std::to_string(i));
      total += it.value();
    }
    if (std::abs(total - 1.0) > kStochasticTol)
      throw ModelError("abstraction row " + std::to_string(i) + " sums to " + std::to_string(total));
  }
}

PerceptionAbstraction normalize_counts(const ContingencyMatrix& cm) {
  cm.validate();
  const int rows = static_cast<int>(cm.states.size());
  const int cols = static_cast<int>(cm.estimates.size());
  std::vector<Eigen::Triplet<double>> triplets;
  for (int i = 0; i < rows; ++i) {
    long total = 0;
    for (int j = 0; j < cols; ++j) total += cm.counts(i, j);
    if (total == 0) throw ZeroRowTotal(cm.states[i]);
    for (int j = 0; j < cols; ++j)
      if (cm.counts(i, j) > 0)
        triplets.emplace_back(i, j, static_cast<double>(cm.counts(i, j)) / static_cast<double>(total));
  }
  SpMat probs(rows, cols);
  probs.setFromTriplets(triplets.begin(), triplets.end());
  return PerceptionAbstraction{std::move(probs)};
}

const std::string& ControllerTable::control(const std::string& env,
                                            const std::string& estimate) const {
  auto e = entries.find(env);
  if (e == entries.end()) throw DomainMismatch("controller has no environment '" + env + "'");
  auto y = e->second.find(estimate);
  if (y == e->second.end())
    throw DomainMismatch("controller(" + env + ") undefined for estimate '" + estimate + "'");
  return y->second;
}

const std::string& DynamicsTable::successor(const std::string& env, const std::string& state,
                                            const std::string& control) const {
  auto e = entries.find(env);
  if (e == entries.end()) throw DomainMismatch("dynamics has no environment '" + env + "'");
  auto s = e->second.find({state, control});
  if (s == e->second.end())
    throw DomainMismatch("dynamics(" + env + ") undefined for (" + state + ", " + control + ")");
  return s->second;
}

std::string DtmcViolation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case RowSumViolation: os << "row " << row << " sums to " << value; break;
    case NegativeEntry: os << "row " << row << " has negative entry " << value; break;
    case NotAbsorbing: os << "error row " << row << " is not absorbing"; break;
    case ShapeMismatch: os << "transition matrix shape does not match state space"; break;
  }
  return os.str();
}

std::vector<DtmcViolation> validate_dtmc(const ClosedLoopDtmc& m) {
  std::vector<DtmcViolation> out;
  const int n = m.num_states();
  if (m.transitions.rows() != n || m.transitions.cols() != n) {
    out.push_back({DtmcViolation::ShapeMismatch, -1, 0.0});
    return out;
  }
  for (int i = 0; i < n; ++i) {
    double total = 0.0;
    for (SpMat::InnerIterator it(m.transitions, i); it; ++it) {
      if (it.value() < 0.0) out.push_back({DtmcViolation::NegativeEntry, i, it.value()});
      total += it.value();
    }
    if (std::abs(total - 1.0) > kStochasticTol)
      out.push_back({DtmcViolation::RowSumViolation, i, total});
  }
  const int err = m.space.error_index();
  double self = m.transitions.coeff(err, err);
  bool absorbing = self == 1.0;
  for (SpMat::InnerIterator it(m.transitions, err); it && absorbing; ++it)
    if (it.col() != err && it.value() != 0.0) absorbing = false;
  if (!absorbing) out.push_back({DtmcViolation::NotAbsorbing, err, self});
  return out;
}

ClosedLoopDtmc compose_closed_loop(const StateSpace& space, const PerceptionAbstraction& alpha,
                                   const ControllerFn& g, const DynamicsFn& f) {
  space.validate();
  const int n = space.num_states();
  const int nbar = space.num_nonerror();
  if (alpha.num_states() != nbar)
    throw DomainMismatch("abstraction rows do not match non-error state count");
  std::vector<Eigen::Triplet<double>> triplets;
  // Successor fan-out per state is bounded by the number of distinct controls.
  std::map<int, double> row;
  for (int s = 0; s < nbar; ++s) {
    row.clear();
    std::map<int, double> control_mass;
    for (SpMat::InnerIterator it(alpha.probs, s); it; ++it)
      control_mass[g(static_cast<int>(it.col()))] += it.value();
    for (const auto& [u, mass] : control_mass) {
      int succ = f(s, u);
      if (succ < 0 || succ >= n)
        throw DomainMismatch("dynamics returned out-of-range state index");
      row[succ] += mass;
    }
    for (const auto& [succ, p] : row) triplets.emplace_back(s, succ, p);
  }
  triplets.emplace_back(space.error_index(), space.error_index(), 1.0);
  SpMat transitions(n, n);
  transitions.setFromTriplets(triplets.begin(), triplets.end());
  return ClosedLoopDtmc{space, std::move(transitions)};
}

ClosedLoopDtmc compose_closed_loop(const StateSpace& space,
                                   const std::vector<std::string>& estimates,
                                   const PerceptionAbstraction& alpha, const ControllerTable& g,
                                   const DynamicsTable& f, const std::string& env) {
  // Resolve the label tables once into index-level callables. Controls get
  // dense ids in first-seen order; the mapping is internal to this call.
  std::vector<std::string> controls;
  auto control_id = [&](const std::string& label) {
    auto it = std::find(controls.begin(), controls.end(), label);
    if (it != controls.end()) return static_cast<int>(it - controls.begin());
    controls.push_back(label);
    return static_cast<int>(controls.size()) - 1;
  };
  std::vector<int> control_of_estimate(estimates.size());
  for (size_t y = 0; y < estimates.size(); ++y)
    control_of_estimate[y] = control_id(g.control(env, estimates[y]));
  ControllerFn gf = [&](int y) { return control_of_estimate[y]; };
  DynamicsFn ff = [&](int s, int u) {
    const std::string& succ = f.successor(env, space.labels[s], controls[u]);
    int idx = space.index_of(succ);
    if (idx < 0) throw DomainMismatch("dynamics successor '" + succ + "' not in state space");
    return idx;
  };
  return compose_closed_loop(space, alpha, gf, ff);
}

}  // namespace scenver
