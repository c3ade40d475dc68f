#include <doctest.h>

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <random>

#include "scenver/linprog.hpp"

using namespace scenver;

namespace {

bool point_feasible(const Vec& x, const AffinePredicate& pred, double tol) {
  if ((x.array() < -tol).any()) return false;
  if (std::abs(x.sum() - 1.0) > tol) return false;
  for (const auto& c : pred.constraints)
    if (x.dot(c.a) > c.theta + tol) return false;
  return true;
}

// Oracle: enumerate candidate vertices of { pred, sum x = 1, x >= 0 } as
// intersections of n-1 active constraints with the sum hyperplane (including
// the x_i = 0 facets), keep the feasible ones, and maximize directly.
std::optional<double> vertex_enumeration_max(const Vec& objective, const AffinePredicate& pred) {
  const int n = static_cast<int>(objective.size());
  std::vector<std::pair<Vec, double>> planes;  // a . x = theta candidates
  for (const auto& c : pred.constraints) planes.push_back({c.a, c.theta});
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    planes.push_back({e, 0.0});
  }
  std::optional<double> best;
  std::vector<int> pick(n - 1);
  // Choose n-1 planes out of the candidate list (n is 2 or 3 here).
  std::function<void(int, int)> choose = [&](int start, int depth) {
    if (depth == n - 1) {
      Mat a(n, n);
      Vec rhs(n);
      for (int r = 0; r < n - 1; ++r) {
        a.row(r) = planes[pick[r]].first.transpose();
        rhs[r] = planes[pick[r]].second;
      }
      a.row(n - 1).setOnes();
      rhs[n - 1] = 1.0;
      Eigen::FullPivLU<Mat> lu(a);
      if (!lu.isInvertible()) return;
      Vec x = lu.solve(rhs);
      if (point_feasible(x, pred, 1e-9)) {
        double value = x.dot(objective);
        if (!best || value > *best) best = value;
      }
      return;
    }
    for (int i = start; i < static_cast<int>(planes.size()); ++i) {
      pick[depth] = i;
      choose(i + 1, depth + 1);
    }
  };
  if (n == 1) {
    Vec x = Vec::Ones(1);
    if (point_feasible(x, pred, 1e-9)) best = objective[0];
  } else {
    choose(0, 0);
  }
  return best;
}

}  // namespace

TEST_CASE("unconstrained simplex max picks the best vertex") {
  LpSolution s = maximize_over_simplex(Vec{{0.2, 0.1}}, {});
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.value == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(s.witness[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(s.witness[1] == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("box-constrained example attains 0.17 at [0.7, 0.3]") {
  AffinePredicate pred;
  pred.constraints.push_back({Vec{{1.0, 0.0}}, 0.7});
  pred.constraints.push_back({Vec{{0.0, 1.0}}, 0.7});
  LpSolution s = maximize_over_simplex(Vec{{0.2, 0.1}}, pred);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.value == doctest::Approx(0.17).epsilon(1e-9));
  CHECK(s.witness[0] == doctest::Approx(0.7).epsilon(1e-7));
  CHECK(s.witness[1] == doctest::Approx(0.3).epsilon(1e-7));
}

TEST_CASE("contradiction with nonnegativity is infeasible") {
  AffinePredicate pred;
  pred.constraints.push_back({Vec{{1.0, 0.0}}, -0.1});
  LpSolution s = maximize_over_simplex(Vec{{0.2, 0.1}}, pred);
  CHECK(s.status == LpStatus::Infeasible);
}

TEST_CASE("is_feasible") {
  CHECK(is_feasible({}, 3));
  AffinePredicate low_mass;
  low_mass.constraints.push_back({Vec::Ones(2), 0.5});
  CHECK_FALSE(is_feasible(low_mass, 2));
  AffinePredicate box;
  box.constraints.push_back({Vec{{1.0, 0.0}}, 0.7});
  box.constraints.push_back({Vec{{0.0, 1.0}}, 0.7});
  CHECK(is_feasible(box, 2));
}

TEST_CASE("entails") {
  AffinePredicate box;
  box.constraints.push_back({Vec{{1.0, 0.0}}, 0.7});
  box.constraints.push_back({Vec{{0.0, 1.0}}, 0.7});
  CHECK(entails(box, Vec{{0.2, 0.1}}, 0.17));
  CHECK_FALSE(entails(box, Vec{{0.2, 0.1}}, 0.15));
  AffinePredicate infeasible;
  infeasible.constraints.push_back({Vec{{1.0, 0.0}}, -0.1});
  CHECK(entails(infeasible, Vec{{100.0, 100.0}}, -5.0));
}

TEST_CASE("witnesses satisfy all constraints") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + static_cast<int>(rng() % 2);
    Vec obj(n);
    for (int i = 0; i < n; ++i) obj[i] = u(rng);
    AffinePredicate pred;
    int d = static_cast<int>(rng() % 4);
    for (int k = 0; k < d; ++k) {
      Vec a(n);
      for (int i = 0; i < n; ++i) a[i] = u(rng);
      pred.constraints.push_back({a, u(rng)});
    }
    LpSolution s = maximize_over_simplex(obj, pred);
    if (s.status == LpStatus::Optimal) CHECK(point_feasible(s.witness, pred, kLpFeasTol));
  }
}

TEST_CASE("LP agrees with vertex enumeration in 2-D and 3-D") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int optimal_seen = 0;
  for (int trial = 0; trial < 300; ++trial) {
    int n = 2 + static_cast<int>(rng() % 2);
    Vec obj(n);
    for (int i = 0; i < n; ++i) obj[i] = u(rng);
    AffinePredicate pred;
    int d = static_cast<int>(rng() % 4);
    for (int k = 0; k < d; ++k) {
      Vec a(n);
      for (int i = 0; i < n; ++i) a[i] = u(rng);
      pred.constraints.push_back({a, u(rng)});
    }
    LpSolution s = maximize_over_simplex(obj, pred);
    auto oracle = vertex_enumeration_max(obj, pred);
    if (s.status == LpStatus::Optimal) {
      ++optimal_seen;
      REQUIRE_MESSAGE(oracle.has_value(), "solver Optimal but oracle found no vertex");
      CHECK(s.value == doctest::Approx(*oracle).epsilon(1e-7));
    } else {
      CHECK_FALSE(oracle.has_value());
    }
  }
  CHECK(optimal_seen > 100);  // the generator must exercise the solver
}

TEST_CASE("adding a constraint never increases the maximum") {
  std::mt19937 rng(101);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 2 + static_cast<int>(rng() % 3);
    Vec obj(n);
    for (int i = 0; i < n; ++i) obj[i] = u(rng);
    AffinePredicate pred;
    LpSolution prev = maximize_over_simplex(obj, pred);
    REQUIRE(prev.status == LpStatus::Optimal);
    for (int k = 0; k < 3; ++k) {
      Vec a(n);
      for (int i = 0; i < n; ++i) a[i] = u(rng);
      pred.constraints.push_back({a, u(rng)});
      LpSolution next = maximize_over_simplex(obj, pred);
      if (next.status != LpStatus::Optimal) break;
      CHECK(next.value <= prev.value + 1e-7);
      prev = next;
    }
  }
}

TEST_CASE("degenerate equality-like predicates") {
  // pred forces x = [0, 1] via two inequalities.
  AffinePredicate pred;
  pred.constraints.push_back({Vec{{1.0, 0.0}}, 0.0});
  LpSolution s = maximize_over_simplex(Vec{{5.0, 1.0}}, pred);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.witness[1] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("larger dimension sanity") {
  const int n = 500;
  Vec obj = Vec::Zero(n);
  obj[123] = 1.0;
  AffinePredicate pred;
  Vec cap = Vec::Zero(n);
  cap[123] = 1.0;
  pred.constraints.push_back({cap, 0.25});
  LpSolution s = maximize_over_simplex(obj, pred);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.value == doctest::Approx(0.25).epsilon(1e-9));
}
