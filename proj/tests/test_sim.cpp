#include <doctest.h>

#include <cmath>

#include "scenver/sim.hpp"

using namespace scenver;

namespace {

ClosedLoopDtmc example_chain() {
  ClosedLoopDtmc c;
  c.space = StateSpace::with_error({"s0", "s1"});
  c.transitions.resize(3, 3);
  std::vector<Eigen::Triplet<double>> t = {
      {0, 0, 0.4}, {0, 1, 0.4}, {0, 2, 0.2},
      {1, 0, 0.4}, {1, 1, 0.5}, {1, 2, 0.1},
      {2, 2, 1.0}};
  c.transitions.setFromTriplets(t.begin(), t.end());
  return c;
}

ChainMap example_chains() {
  ChainMap m;
  m.emplace("day", example_chain());
  return m;
}

}  // namespace

TEST_CASE("splitmix64 is a fixed function") {
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
  CHECK(splitmix64(1) != splitmix64(2));
}

TEST_CASE("trajectories are deterministic in the seed") {
  ChainMap chains = example_chains();
  ScenarioSequence seq{{{"day", 4}, {"day", 4}}};
  for (std::uint64_t seed : {1ULL, 99ULL, 0xDEADBEEFULL}) {
    auto a = sample_trajectory(seq, chains, 0, seed);
    auto b = sample_trajectory(seq, chains, 0, seed);
    CHECK(a == b);
  }
  // Different seeds eventually differ.
  bool differed = false;
  for (std::uint64_t seed = 0; seed < 32 && !differed; ++seed)
    differed = sample_trajectory(seq, chains, 0, seed) !=
               sample_trajectory(seq, chains, 0, seed + 1000);
  CHECK(differed);
}

TEST_CASE("identity-like chain never errs") {
  ClosedLoopDtmc c;
  c.space = StateSpace::with_error({"s0", "s1"});
  c.transitions.resize(3, 3);
  std::vector<Eigen::Triplet<double>> t = {{0, 1, 1.0}, {1, 0, 1.0}, {2, 2, 1.0}};
  c.transitions.setFromTriplets(t.begin(), t.end());
  ChainMap chains;
  chains.emplace("loop", std::move(c));
  ScenarioSequence seq{{{"loop", 17}}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto [errored, final_state] = sample_trajectory(seq, chains, 0, seed);
    CHECK_FALSE(errored);
    CHECK(final_state == 17 % 2);
  }
  SimReport r = estimate_error_probability(seq, chains, Distribution::checked(Vec{{1.0, 0.0}}),
                                           500, 7);
  CHECK(r.error_hits == 0);
  CHECK(r.estimate == doctest::Approx(0.0));
}

TEST_CASE("certain error is always hit") {
  ClosedLoopDtmc c;
  c.space = StateSpace::with_error({"s0"});
  c.transitions.resize(2, 2);
  std::vector<Eigen::Triplet<double>> t = {{0, 1, 1.0}, {1, 1, 1.0}};
  c.transitions.setFromTriplets(t.begin(), t.end());
  ChainMap chains;
  chains.emplace("doom", std::move(c));
  ScenarioSequence seq{{{"doom", 1}}};
  SimReport r =
      estimate_error_probability(seq, chains, Distribution::checked(Vec{{1.0}}), 200, 3);
  CHECK(r.error_hits == 200);
  CHECK(r.std_error == doctest::Approx(0.0));
}

TEST_CASE("estimate agrees with the exact error probability") {
  ChainMap chains = example_chains();
  Distribution init = Distribution::checked(Vec{{0.5, 0.5}});

  ScenarioSequence one{{{"day", 1}}};
  Vec b1 = sequence_error_probabilities(one, chains);
  double exact1 = 0.5 * b1[0] + 0.5 * b1[1];
  CHECK(exact1 == doctest::Approx(0.15).epsilon(1e-12));

  ScenarioSequence two{{{"day", 1}, {"day", 1}}};
  Vec b2 = sequence_error_probabilities(two, chains);

  const long n = 40000;
  for (auto [seq, exact] : {std::pair{one, exact1},
                            std::pair{two, 0.5 * b2[0] + 0.5 * b2[1]}}) {
    SimReport r = estimate_error_probability(seq, chains, init, n, 12345);
    CHECK(r.runs == n);
    CHECK(r.estimate == doctest::Approx(static_cast<double>(r.error_hits) / n));
    double sigma = std::sqrt(exact * (1.0 - exact) / n);
    CHECK(std::abs(r.estimate - exact) < 5.0 * sigma);
    CHECK(r.std_error ==
          doctest::Approx(std::sqrt(r.estimate * (1.0 - r.estimate) / n)).epsilon(1e-12));
  }
}

TEST_CASE("report echoes the seed and reruns reproduce it") {
  ChainMap chains = example_chains();
  ScenarioSequence seq{{{"day", 3}}};
  Distribution init = Distribution::checked(Vec{{0.3, 0.7}});
  SimReport a = estimate_error_probability(seq, chains, init, 5000, 42);
  SimReport b = estimate_error_probability(seq, chains, init, 5000, 42);
  CHECK(a.seed == 42);
  CHECK(a.error_hits == b.error_hits);
}

TEST_CASE("unknown environment throws") {
  ChainMap chains = example_chains();
  ScenarioSequence seq{{{"night", 2}}};
  CHECK_THROWS_AS(sample_trajectory(seq, chains, 0, 1), UnknownEnvironment);
}
