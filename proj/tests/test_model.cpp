#include <doctest.h>

#include <random>

#include "scenver/model.hpp"

using namespace scenver;

namespace {

ContingencyMatrix make_cm(std::vector<std::vector<long>> rows,
                          std::vector<std::string> estimates) {
  ContingencyMatrix cm;
  cm.estimates = std::move(estimates);
  for (size_t i = 0; i < rows.size(); ++i) cm.states.push_back("s" + std::to_string(i));
  cm.counts.resize(rows.size(), cm.estimates.size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) cm.counts(i, j) = rows[i][j];
  return cm;
}

}  // namespace

TEST_CASE("normalize_counts basic rows") {
  auto cm = make_cm({{8, 2}, {1, 9}}, {"y0", "y1"});
  auto alpha = normalize_counts(cm);
  CHECK(alpha.probs.coeff(0, 0) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(alpha.probs.coeff(0, 1) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(alpha.probs.coeff(1, 1) == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("normalize_counts degenerate mass") {
  auto cm = make_cm({{5, 0, 0}}, {"a", "b", "c"});
  auto alpha = normalize_counts(cm);
  CHECK(alpha.probs.coeff(0, 0) == 1.0);
  CHECK(alpha.probs.coeff(0, 1) == 0.0);
  CHECK(alpha.probs.coeff(0, 2) == 0.0);
}

TEST_CASE("normalize_counts row excerpt") {
  // 964 + 44 + 30 + 18 = 1056.
  auto cm = make_cm({{964, 44, 30, 18}}, {"a", "b", "c", "d"});
  auto alpha = normalize_counts(cm);
  CHECK(alpha.probs.coeff(0, 0) == doctest::Approx(964.0 / 1056.0).epsilon(1e-12));
  CHECK(alpha.probs.coeff(0, 1) == doctest::Approx(44.0 / 1056.0).epsilon(1e-12));
  CHECK(alpha.probs.coeff(0, 2) == doctest::Approx(30.0 / 1056.0).epsilon(1e-12));
  CHECK(alpha.probs.coeff(0, 3) == doctest::Approx(18.0 / 1056.0).epsilon(1e-12));
  CHECK(alpha.probs.coeff(0, 0) == doctest::Approx(0.912878787878).epsilon(1e-9));
}

TEST_CASE("normalize_counts rejects empty rows") {
  auto cm = make_cm({{1, 1}, {0, 0}}, {"y0", "y1"});
  CHECK_THROWS_AS(normalize_counts(cm), ZeroRowTotal);
}

TEST_CASE("normalize_counts rows always sum to one") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> dim(1, 6), count(0, 50);
  for (int trial = 0; trial < 50; ++trial) {
    int rows = dim(rng), cols = dim(rng);
    std::vector<std::vector<long>> data(rows, std::vector<long>(cols));
    std::vector<std::string> est;
    for (int j = 0; j < cols; ++j) est.push_back("y" + std::to_string(j));
    for (auto& row : data) {
      long total = 0;
      for (auto& c : row) total += (c = count(rng));
      if (total == 0) row[0] = 1;
    }
    auto alpha = normalize_counts(make_cm(data, est));
    for (int i = 0; i < rows; ++i) {
      double total = 0;
      for (int j = 0; j < cols; ++j) total += alpha.probs.coeff(i, j);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK_NOTHROW(alpha.validate());
  }
}

TEST_CASE("normalize_subdistribution") {
  SUBCASE("renormalizes") {
    auto d = normalize_subdistribution(SubDistribution{Vec{{0.4, 0.45}}});
    CHECK(d.weights[0] == doctest::Approx(0.4 / 0.85).epsilon(1e-12));
    CHECK(d.weights[1] == doctest::Approx(0.45 / 0.85).epsilon(1e-12));
  }
  SUBCASE("identity on proper distributions") {
    auto d = normalize_subdistribution(SubDistribution{Vec{{0.25, 0.75}}});
    CHECK(d.weights[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(d.weights[1] == doctest::Approx(0.75).epsilon(1e-12));
  }
  SUBCASE("vanishing mass") {
    CHECK_THROWS_AS(normalize_subdistribution(SubDistribution{Vec{{0.0, 0.0}}}), VanishingMass);
  }
  SUBCASE("scale invariance and idempotence") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
      Vec x(3);
      for (int i = 0; i < 3; ++i) x[i] = u(rng);
      x /= (x.sum() * 1.5);  // proper subdistribution
      double c = u(rng) * 0.9;
      auto n1 = normalize_subdistribution(SubDistribution{x});
      auto n2 = normalize_subdistribution(SubDistribution{Vec(c * x)});
      auto n3 = normalize_subdistribution(SubDistribution{n1.weights});
      for (int i = 0; i < 3; ++i) {
        CHECK(n1.weights[i] == doctest::Approx(n2.weights[i]).epsilon(1e-9));
        CHECK(n1.weights[i] == doctest::Approx(n3.weights[i]).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("compose_closed_loop with perfect perception is deterministic") {
  StateSpace space = StateSpace::with_error({"s0", "s1"});
  auto alpha = PerceptionAbstraction::identity(2);
  // g(y) = y, f(s, u) = u: go wherever perception says we are.
  auto m = compose_closed_loop(
      space, alpha, [](int y) { return y; }, [](int, int u) { return u; });
  CHECK(m.transitions.coeff(0, 0) == 1.0);
  CHECK(m.transitions.coeff(1, 1) == 1.0);
  CHECK(validate_dtmc(m).empty());
}

TEST_CASE("compose_closed_loop two-branch sum") {
  // alpha(s0) = [0.5, 0.5]; control u_i from estimate i; f(s0,u0)=s0, f(s0,u1)=err.
  StateSpace space = StateSpace::with_error({"s0", "s1"});
  SpMat probs(2, 2);
  probs.insert(0, 0) = 0.5;
  probs.insert(0, 1) = 0.5;
  probs.insert(1, 1) = 1.0;
  auto m = compose_closed_loop(
      space, PerceptionAbstraction{probs}, [](int y) { return y; },
      [&](int s, int u) {
        if (s == 0) return u == 0 ? 0 : 2;
        return 1;
      });
  CHECK(m.transitions.coeff(0, 0) == doctest::Approx(0.5));
  CHECK(m.transitions.coeff(0, 1) == 0.0);
  CHECK(m.transitions.coeff(0, 2) == doctest::Approx(0.5));
  CHECK(validate_dtmc(m).empty());
}

TEST_CASE("compose_closed_loop error row is exactly absorbing") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + static_cast<int>(rng() % 4);
    std::vector<std::string> labels;
    for (int i = 0; i < n; ++i) labels.push_back("s" + std::to_string(i));
    StateSpace space = StateSpace::with_error(std::move(labels));
    std::vector<Eigen::Triplet<double>> t;
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int s = 0; s < n; ++s) {
      Vec row(n);
      for (int y = 0; y < n; ++y) row[y] = u(rng);
      row /= row.sum();
      for (int y = 0; y < n; ++y) t.emplace_back(s, y, row[y]);
    }
    SpMat probs(n, n);
    probs.setFromTriplets(t.begin(), t.end());
    auto m = compose_closed_loop(
        space, PerceptionAbstraction{probs}, [](int y) { return y % 3; },
        [&](int s, int uu) { return (s + uu) % (n + 1); });
    CHECK(validate_dtmc(m).empty());
    int err = space.error_index();
    CHECK(m.transitions.coeff(err, err) == 1.0);
    CHECK(m.transitions.row(err).nonZeros() == 1);
  }
}

TEST_CASE("validate_dtmc reports defects") {
  StateSpace space = StateSpace::with_error({"a", "b"});
  SUBCASE("valid chain") {
    SpMat t(3, 3);
    t.insert(0, 1) = 1.0;
    t.insert(1, 2) = 1.0;
    t.insert(2, 2) = 1.0;
    CHECK(validate_dtmc({space, t}).empty());
  }
  SUBCASE("bad row sum") {
    SpMat t(3, 3);
    t.insert(0, 1) = 0.9;
    t.insert(1, 1) = 1.0;
    t.insert(2, 2) = 1.0;
    auto v = validate_dtmc({space, t});
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == DtmcViolation::RowSumViolation);
    CHECK(v[0].row == 0);
    CHECK(v[0].value == doctest::Approx(0.9));
  }
  SUBCASE("error row with escape mass") {
    SpMat t(3, 3);
    t.insert(0, 0) = 1.0;
    t.insert(1, 1) = 1.0;
    t.insert(2, 2) = 0.5;
    t.insert(2, 0) = 0.5;
    auto v = validate_dtmc({space, t});
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == DtmcViolation::NotAbsorbing);
    CHECK(v[0].row == 2);
  }
}

TEST_CASE("state space validation") {
  CHECK_THROWS_AS(StateSpace{{"only"}}.validate(), ModelError);
  CHECK_THROWS_AS(StateSpace::with_error({"a", "a"}), ModelError);
  CHECK_THROWS_AS(StateSpace::with_error({""}), ModelError);
  StateSpace s = StateSpace::with_error({"a", "b"});
  CHECK(s.error_index() == 2);
  CHECK(s.index_of("b") == 1);
  CHECK(s.index_of("zzz") == -1);
}

TEST_CASE("table lookups flag domain mismatches") {
  ControllerTable g;
  g.entries["e"]["y0"] = "u0";
  CHECK(g.control("e", "y0") == "u0");
  CHECK_THROWS_AS(g.control("e", "y1"), DomainMismatch);
  CHECK_THROWS_AS(g.control("other", "y0"), DomainMismatch);
  DynamicsTable f;
  f.entries["e"][{"s0", "u0"}] = "s1";
  CHECK(f.successor("e", "s0", "u0") == "s1");
  CHECK_THROWS_AS(f.successor("e", "s0", "u1"), DomainMismatch);
}
