#include "scenver/sim.hpp"

#include <cmath>
#include <random>

namespace scenver {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

double next_unit(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

// Inverse-CDF walk over the row's stored (ascending column) order. A draw
// past the accumulated mass (floating slack) lands on the last nonzero entry.
int sample_row(const SpMat& transitions, int row, double u) {
  double acc = 0.0;
  int last = row;
  for (SpMat::InnerIterator it(transitions, row); it; ++it) {
    acc += it.value();
    last = static_cast<int>(it.col());
    if (u < acc) return last;
  }
  return last;
}

int sample_categorical(const Vec& weights, double u) {
  double acc = 0.0;
  int last = 0;
  for (int i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (u < acc) return last;
  }
  return last;
}

std::pair<bool, int> run_trajectory(const ScenarioSequence& seq, const ChainMap& chains, int start,
                                    std::mt19937_64& rng) {
  int state = start;
  for (const Scenario& sc : seq.items) {
    auto it = chains.find(sc.env);
    if (it == chains.end()) throw UnknownEnvironment(sc.env);
    const ClosedLoopDtmc& m = it->second;
    const int err = m.space.error_index();
    if (state == err) return {true, err};
    for (int step = 0; step < sc.horizon; ++step) {
      state = sample_row(m.transitions, state, next_unit(rng));
      if (state == err) return {true, err};
    }
  }
  return {false, state};
}

}  // namespace

std::pair<bool, int> sample_trajectory(const ScenarioSequence& seq, const ChainMap& chains,
                                       int start, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return run_trajectory(seq, chains, start, rng);
}

SimReport estimate_error_probability(const ScenarioSequence& seq, const ChainMap& chains,
                                     const Distribution& init, long n, std::uint64_t seed) {
  if (n < 1) throw ModelError("need at least one run");
  long hits = 0;
  for (long i = 0; i < n; ++i) {
    std::mt19937_64 rng(splitmix64(seed + static_cast<std::uint64_t>(i + 1) *
                                              0x9E3779B97F4A7C15ULL));
    int start = sample_categorical(init.weights, next_unit(rng));
    if (run_trajectory(seq, chains, start, rng).first) ++hits;
  }
  SimReport report;
  report.runs = n;
  report.error_hits = hits;
  report.estimate = static_cast<double>(hits) / static_cast<double>(n);
  report.std_error = std::sqrt(report.estimate * (1.0 - report.estimate) / static_cast<double>(n));
  report.seed = seed;
  return report;
}

}  // namespace scenver
