#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scenver/model.hpp"

namespace scenver {

class InvalidParameter : public ModelError {
 public:
  using ModelError::ModelError;
};

class MissingEnvironment : public ModelError {
 public:
  explicit MissingEnvironment(const std::string& env)
      : ModelError("no perception model for environment '" + env + "'"), env(env) {}
  std::string env;
};

// ---------------------------------------------------------------------------
// TaxiNet: runway-tracking state discretization.
// ---------------------------------------------------------------------------

/// Cross-track error class for cte in meters: {0..4}, or -1 when out of range.
int taxinet_cte_class(double cte_m);
/// Heading-error class for he in degrees: {0..2}, or -1 when out of range.
int taxinet_he_class(double he_deg);

/// 15 states labeled "(c,h)" (c in 0..4, h in 0..2) plus "err".
StateSpace taxinet_space();

/// Maps a continuous pose to a state index in taxinet_space(); out-of-range
/// poses map to the error index.
int taxinet_discretize(double cte_m, double he_deg);

/// Estimates grid-adjacent to a TaxiNet state (spatial adjacency in the
/// signed cte/he orderings, not class-number adjacency).
std::vector<int> taxinet_neighbors(int state);

/// Illustrative closed-loop tables for environments "bright" and "dark":
/// the controller reports the believed cte position, the dynamics steer one
/// spatial step against it and align the heading. Not from any real system.
std::pair<ControllerTable, DynamicsTable> taxinet_example_tables();

// ---------------------------------------------------------------------------
// F1Tenth: discrete track-segment navigation.
// ---------------------------------------------------------------------------

enum class Segment { Left, Right, Straight };

const std::string& segment_name(Segment s);
std::optional<Segment> segment_from_name(const std::string& name);
inline constexpr std::array<Segment, 3> kAllSegments{Segment::Left, Segment::Right,
                                                     Segment::Straight};

struct F1TenthConfig {
  int side_range = 7;    // pos_side in [-side_range, side_range]
  int front_range = 16;  // pos_front in [0, front_range]
  int headings = 8;
  int horizon = 30;          // tau in [1, horizon]
  int start_front = 15;      // pos_front at segment entry
  int track_half_width = 3;  // straight corridor: |pos_side| <= this
  int exit_band = 3;         // turn corridors span pos_front in [0, exit_band]

  // Optional region overrides as explicit (pos_side, pos_front) lists. Keys:
  // "track", "track_left", "track_right", "final_left", "final_right",
  // "final_straight". Absent keys use the default geometry.
  std::map<std::string, std::vector<std::array<int, 2>>> region_overrides;

  static F1TenthConfig defaults() { return {}; }
  static F1TenthConfig reduced();  // side 4, front 9, horizon 12
};

/// State indexing, regions, dynamics and controller for one config.
class F1TenthModel {
 public:
  explicit F1TenthModel(F1TenthConfig cfg);

  const F1TenthConfig& config() const { return cfg_; }
  const StateSpace& space() const { return space_; }
  int num_nonerror() const { return space_.num_nonerror(); }
  int error_index() const { return space_.error_index(); }

  int index(int pos_side, int pos_front, int heading, int tau) const;
  struct State {
    int pos_side, pos_front, heading, tau;
  };
  State decode(int index) const;

  bool on_track(int ps, int pf) const;
  bool in_extension(Segment e, int ps, int pf) const;
  bool in_final(Segment e, int ps, int pf) const;

  /// Total deterministic dynamics; the error index is a fixed point.
  int dynamics(Segment e, int state, int control) const;

  /// Steering policy from a (non-error) state estimate; returns -1, 0 or 1.
  int controller(Segment e, int estimate) const;

  /// Entry states: heading 0, pos_front = start_front, |pos_side| <= 2, tau = 1.
  std::vector<int> nominal_starts() const;

 private:
  bool in_region(const std::vector<std::array<int, 2>>* override_set, bool fallback, int ps,
                 int pf) const;
  const std::vector<std::array<int, 2>>* override_for(const std::string& key) const;

  F1TenthConfig cfg_;
  StateSpace space_;
};

// ---------------------------------------------------------------------------
// Synthetic perception noise.
// ---------------------------------------------------------------------------

struct SyntheticNoiseModel {
  enum class Kind { Perfect, Uniform, Neighbor };
  Kind kind = Kind::Perfect;
  double p = 0.0;

  static SyntheticNoiseModel perfect() { return {Kind::Perfect, 0.0}; }
  static SyntheticNoiseModel uniform(double p) { return {Kind::Uniform, p}; }
  static SyntheticNoiseModel neighbor(double p) { return {Kind::Neighbor, p}; }
};

/// Explicit abstraction over n states (estimate space = state space).
/// Perfect: identity. Uniform(p): 1-p on the truth, p spread over the others.
/// Neighbor(p): p spread over `neighbors(s)`, renormalized per state. Uniform
/// rows are dense; intended for small spaces (chain builders below avoid
/// materializing it).
PerceptionAbstraction synthetic_abstraction(
    int n, const SyntheticNoiseModel& noise,
    const std::function<std::vector<int>(int)>& neighbors = {});

/// Closed-loop chain for one segment without materializing dense abstractions.
ClosedLoopDtmc build_f1tenth_chain(const F1TenthModel& model, Segment e,
                                   const SyntheticNoiseModel& noise);

/// One chain per segment; throws MissingEnvironment when a segment has no
/// noise model. Keys are segment names.
ChainMap build_f1tenth_chains(const F1TenthModel& model,
                                   const std::map<std::string, SyntheticNoiseModel>& noise);

/// TaxiNet chains from explicit abstractions (e.g. normalized contingency
/// data) over the illustrative example tables.
ChainMap build_taxinet_chains(const std::map<std::string, PerceptionAbstraction>& abstractions);

}  // namespace scenver
