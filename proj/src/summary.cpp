#include "scenver/summary.hpp"

#include <cmath>

namespace scenver {

namespace {

// Non-error block and error column of a chain's one-step matrix.
std::pair<SpMat, Vec> split_blocks(const ClosedLoopDtmc& m) {
  const int nbar = m.space.num_nonerror();
  const int err = m.space.error_index();
  std::vector<Eigen::Triplet<double>> triplets;
  Vec b = Vec::Zero(nbar);
  for (int i = 0; i < nbar; ++i) {
    for (SpMat::InnerIterator it(m.transitions, i); it; ++it) {
      if (it.col() == err)
        b[i] = it.value();
      else
        triplets.emplace_back(i, static_cast<int>(it.col()), it.value());
    }
  }
  SpMat a(nbar, nbar);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return {std::move(a), std::move(b)};
}

}  // namespace

Summary::Summary(SpMat a, Vec b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != a_.cols() || a_.rows() != b_.size())
    throw DimensionMismatch("summary blocks have inconsistent shapes");
}

Summary Summary::identity(int n) {
  SpMat a(n, n);
  a.setIdentity();
  return Summary(std::move(a), Vec::Zero(n));
}

void Summary::validate() const {
  for (int i = 0; i < size(); ++i) {
    double total = b_[i];
    if (b_[i] < -kStochasticTol || b_[i] > 1.0 + kStochasticTol)
      throw ModelError("summary b(" + std::to_string(i) + ") outside [0,1]");
    for (SpMat::InnerIterator it(a_, i); it; ++it) {
      if (it.value() < -kStochasticTol || it.value() > 1.0 + kStochasticTol)
        throw ModelError("summary A entry outside [0,1] in row " + std::to_string(i));
      total += it.value();
    }
    if (std::abs(total - 1.0) > kStochasticTol)
      throw ModelError("summary row " + std::to_string(i) + " mass " + std::to_string(total));
  }
}

Summary compose(const Summary& c1, const Summary& c2) {
  if (c1.size() != c2.size()) throw DimensionMismatch("composed summaries differ in dimension");
  SpMat a = c1.a() * c2.a();
  Vec b = c1.b() + c1.a() * c2.b();
  return Summary(std::move(a), std::move(b));
}

Summary summarize(const ClosedLoopDtmc& m, int horizon) {
  if (horizon < 1) throw ModelError("horizon must be >= 1");
  auto [a, b] = split_blocks(m);
  Summary step(std::move(a), std::move(b));
  if (horizon < 32) {
    Summary acc = step;
    for (int i = 1; i < horizon; ++i) acc = compose(acc, step);
    return acc;
  }
  // Square-and-multiply over the compose monoid.
  Summary acc = Summary::identity(step.size());
  Summary base = step;
  int h = horizon;
  while (h > 0) {
    if (h & 1) acc = compose(acc, base);
    h >>= 1;
    if (h > 0) base = compose(base, base);
  }
  return acc;
}

Summary summarize_sequence(const ScenarioSequence& seq, const ChainMap& chains) {
  if (seq.items.empty()) throw ModelError("scenario sequence must be non-empty");
  Summary acc = Summary::identity(0);
  bool first = true;
  for (const Scenario& sc : seq.items) {
    auto it = chains.find(sc.env);
    if (it == chains.end()) throw UnknownEnvironment(sc.env);
    Summary s = summarize(it->second, sc.horizon);
    acc = first ? std::move(s) : compose(acc, s);
    first = false;
  }
  return acc;
}

std::pair<double, SubDistribution> apply(const Summary& c, const Distribution& x) {
  if (x.weights.size() != c.size()) throw DimensionMismatch("distribution dimension mismatch");
  double error_prob = x.weights.dot(c.b());
  Vec survivors = c.a().transpose() * x.weights;  // row vector x times A
  return {error_prob, SubDistribution{std::move(survivors)}};
}

Vec sequence_error_probabilities(const ScenarioSequence& seq, const ChainMap& chains) {
  if (seq.items.empty()) throw ModelError("scenario sequence must be non-empty");
  int nbar = -1;
  for (const Scenario& sc : seq.items) {
    auto it = chains.find(sc.env);
    if (it == chains.end()) throw UnknownEnvironment(sc.env);
    int cur = it->second.space.num_nonerror();
    if (nbar < 0) nbar = cur;
    if (cur != nbar) throw DimensionMismatch("chains in a sequence must share a state space");
  }
  // v accumulates the composed error column right-to-left:
  // v <- b_e + A_e v, one update per chain step.
  Vec v = Vec::Zero(nbar);
  for (auto it = seq.items.rbegin(); it != seq.items.rend(); ++it) {
    auto [a, b] = split_blocks(chains.at(it->env));
    for (int step = 0; step < it->horizon; ++step) v = b + a * v;
  }
  return v;
}

}  // namespace scenver
