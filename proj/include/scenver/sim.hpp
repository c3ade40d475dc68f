#pragma once

#include <cstdint>
#include <utility>

#include "scenver/summary.hpp"

namespace scenver {

/// Monte Carlo estimate of the error probability of a scenario sequence.
struct SimReport {
  long runs = 0;
  long error_hits = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t seed = 0;
};

/// splitmix64 step; also the documented sub-seed derivation for run i:
/// sub_seed(seed, i) = splitmix64(seed + (i + 1) * 0x9E3779B97F4A7C15).
std::uint64_t splitmix64(std::uint64_t x);

/// Simulates the sequence step by step from `start` (a non-error index),
/// sampling successors by inverse CDF over each row's stored column order.
/// Stops early on reaching the error state. Deterministic given the seed;
/// the generator is std::mt19937_64 (bit-stable per the C++ standard) with
/// uniform doubles taken as (x >> 11) * 2^-53.
std::pair<bool, int> sample_trajectory(const ScenarioSequence& seq, const ChainMap& chains,
                                       int start, std::uint64_t seed);

/// n independent trajectories, initial states drawn from `init`.
/// estimate = hits/n, std_error = sqrt(estimate (1-estimate) / n).
SimReport estimate_error_probability(const ScenarioSequence& seq, const ChainMap& chains,
                                     const Distribution& init, long n, std::uint64_t seed);

}  // namespace scenver
