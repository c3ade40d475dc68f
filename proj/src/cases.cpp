#include "scenver/cases.hpp"

#include <algorithm>
#include <cmath>

namespace scenver {

// ---------------------------------------------------------------------------
// TaxiNet
// ---------------------------------------------------------------------------

int taxinet_cte_class(double cte_m) {
  if (cte_m >= -8.0 && cte_m < -4.8) return 3;
  if (cte_m >= -4.8 && cte_m < -1.6) return 1;
  if (cte_m >= -1.6 && cte_m <= 1.6) return 0;
  if (cte_m > 1.6 && cte_m <= 4.8) return 2;
  if (cte_m > 4.8 && cte_m <= 8.0) return 4;
  return -1;
}

int taxinet_he_class(double he_deg) {
  if (he_deg >= -35.0 && he_deg < -11.67) return 1;
  if (he_deg >= -11.67 && he_deg <= 11.66) return 0;
  if (he_deg > 11.66 && he_deg <= 35.0) return 2;
  return -1;
}

namespace {

std::string taxinet_label(int cte, int he) {
  return "(" + std::to_string(cte) + "," + std::to_string(he) + ")";
}

// Spatial (signed) position of each class; classes are not spatially ordered.
int cte_position(int cls) {
  static constexpr int pos[5] = {0, -1, 1, -2, 2};
  return pos[cls];
}
int cte_class_at(int position) {
  static constexpr int cls[5] = {3, 1, 0, 2, 4};
  return cls[position + 2];
}
int he_position(int cls) {
  static constexpr int pos[3] = {0, -1, 1};
  return pos[cls];
}
int he_class_at(int position) {
  static constexpr int cls[3] = {1, 0, 2};
  return cls[position + 1];
}

}  // namespace

StateSpace taxinet_space() {
  std::vector<std::string> labels;
  for (int c = 0; c < 5; ++c)
    for (int h = 0; h < 3; ++h) labels.push_back(taxinet_label(c, h));
  return StateSpace::with_error(std::move(labels));
}

int taxinet_discretize(double cte_m, double he_deg) {
  int c = taxinet_cte_class(cte_m);
  int h = taxinet_he_class(he_deg);
  if (c < 0 || h < 0) return 15;  // error index
  return c * 3 + h;
}

std::vector<int> taxinet_neighbors(int state) {
  int c = state / 3, h = state % 3;
  int cp = cte_position(c), hp = he_position(h);
  std::vector<int> out;
  for (int dc = -1; dc <= 1; ++dc)
    for (int dh = -1; dh <= 1; ++dh) {
      if (std::abs(dc) + std::abs(dh) != 1) continue;
      int ncp = cp + dc, nhp = hp + dh;
      if (ncp < -2 || ncp > 2 || nhp < -1 || nhp > 1) continue;
      out.push_back(cte_class_at(ncp) * 3 + he_class_at(nhp));
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::pair<ControllerTable, DynamicsTable> taxinet_example_tables() {
  ControllerTable g;
  DynamicsTable f;
  for (const std::string& env : {"bright", "dark"}) {
    auto& gmap = g.entries[env];
    auto& fmap = f.entries[env];
    for (int c = 0; c < 5; ++c) {
      for (int h = 0; h < 3; ++h) {
        std::string state = taxinet_label(c, h);
        // The controller reports the believed lateral position.
        gmap[state] = "u" + std::to_string(cte_position(c));
        // Dynamics: steer one spatial step against the reported position and
        // align the heading. A confidently wrong report can leave the runway.
        for (int k = -2; k <= 2; ++k) {
          int step = (k > 0) - (k < 0);
          int next_pos = cte_position(c) - step;
          std::string succ = (next_pos < -2 || next_pos > 2)
                                 ? "err"
                                 : taxinet_label(cte_class_at(next_pos), he_class_at(0));
          fmap[{state, "u" + std::to_string(k)}] = succ;
        }
      }
    }
    for (int k = -2; k <= 2; ++k) fmap[{"err", "u" + std::to_string(k)}] = "err";
  }
  return {std::move(g), std::move(f)};
}

// ---------------------------------------------------------------------------
// F1Tenth
// ---------------------------------------------------------------------------

const std::string& segment_name(Segment s) {
  static const std::string names[3] = {"left", "right", "straight"};
  return names[static_cast<int>(s)];
}

std::optional<Segment> segment_from_name(const std::string& name) {
  for (Segment s : kAllSegments)
    if (segment_name(s) == name) return s;
  return std::nullopt;
}

F1TenthConfig F1TenthConfig::reduced() {
  F1TenthConfig cfg;
  cfg.side_range = 4;
  cfg.front_range = 9;
  cfg.horizon = 12;
  cfg.start_front = 8;
  return cfg;
}

F1TenthModel::F1TenthModel(F1TenthConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.side_range < 1 || cfg_.front_range < 1 || cfg_.horizon < 1 || cfg_.headings != 8)
    throw InvalidParameter("invalid F1Tenth grid configuration");
  if (cfg_.start_front < 0 || cfg_.start_front > cfg_.front_range)
    throw InvalidParameter("start_front outside the grid");
  std::vector<std::string> labels;
  labels.reserve(static_cast<size_t>(2 * cfg_.side_range + 1) * (cfg_.front_range + 1) *
                 cfg_.headings * cfg_.horizon);
  for (int ps = -cfg_.side_range; ps <= cfg_.side_range; ++ps)
    for (int pf = 0; pf <= cfg_.front_range; ++pf)
      for (int h = 0; h < cfg_.headings; ++h)
        for (int tau = 1; tau <= cfg_.horizon; ++tau)
          labels.push_back("(" + std::to_string(ps) + "," + std::to_string(pf) + "," +
                           std::to_string(h) + "," + std::to_string(tau) + ")");
  space_ = StateSpace::with_error(std::move(labels));
}

int F1TenthModel::index(int ps, int pf, int heading, int tau) const {
  return (((ps + cfg_.side_range) * (cfg_.front_range + 1) + pf) * cfg_.headings + heading) *
             cfg_.horizon +
         (tau - 1);
}

F1TenthModel::State F1TenthModel::decode(int index) const {
  State s{};
  s.tau = index % cfg_.horizon + 1;
  index /= cfg_.horizon;
  s.heading = index % cfg_.headings;
  index /= cfg_.headings;
  s.pos_front = index % (cfg_.front_range + 1);
  s.pos_side = index / (cfg_.front_range + 1) - cfg_.side_range;
  return s;
}

const std::vector<std::array<int, 2>>* F1TenthModel::override_for(const std::string& key) const {
  auto it = cfg_.region_overrides.find(key);
  return it == cfg_.region_overrides.end() ? nullptr : &it->second;
}

bool F1TenthModel::in_region(const std::vector<std::array<int, 2>>* override_set, bool fallback,
                             int ps, int pf) const {
  if (override_set == nullptr) return fallback;
  return std::find(override_set->begin(), override_set->end(), std::array<int, 2>{ps, pf}) !=
         override_set->end();
}

bool F1TenthModel::on_track(int ps, int pf) const {
  bool dflt = std::abs(ps) <= cfg_.track_half_width && pf >= 0 && pf <= cfg_.front_range;
  return in_region(override_for("track"), dflt, ps, pf);
}

bool F1TenthModel::in_extension(Segment e, int ps, int pf) const {
  bool in_band = pf >= 0 && pf <= cfg_.exit_band;
  switch (e) {
    case Segment::Left:
      return in_region(override_for("track_left"),
                       in_band && ps >= -cfg_.side_range && ps < -cfg_.track_half_width, ps, pf);
    case Segment::Right:
      return in_region(override_for("track_right"),
                       in_band && ps <= cfg_.side_range && ps > cfg_.track_half_width, ps, pf);
    case Segment::Straight:
      return false;
  }
  return false;
}

bool F1TenthModel::in_final(Segment e, int ps, int pf) const {
  switch (e) {
    case Segment::Left:
      return in_region(override_for("final_left"), in_extension(Segment::Left, ps, pf), ps, pf);
    case Segment::Right:
      return in_region(override_for("final_right"), in_extension(Segment::Right, ps, pf), ps, pf);
    case Segment::Straight:
      return in_region(override_for("final_straight"),
                       pf == 0 && std::abs(ps) <= cfg_.track_half_width, ps, pf);
  }
  return false;
}

int F1TenthModel::dynamics(Segment e, int state, int control) const {
  const int err = error_index();
  if (state == err) return err;
  if (control < -1 || control > 1) throw InvalidParameter("control outside {-1,0,1}");
  State s = decode(state);
  if (s.tau < cfg_.horizon) {
    // Reached the segment exit early: hold position and heading until the
    // scenario's horizon so the exit remapping can fire.
    if (in_final(e, s.pos_side, s.pos_front))
      return index(s.pos_side, s.pos_front, s.heading, s.tau + 1);
    int h2 = ((s.heading + control) % 8 + 8) % 8;
    // Move one grid cell in the direction of the updated heading.
    int ps2 = s.pos_side - (h2 >= 1 && h2 <= 3 ? 1 : 0) + (h2 >= 5 && h2 <= 7 ? 1 : 0);
    int pf2 = s.pos_front - (h2 == 0 || h2 == 1 || h2 == 7 ? 1 : 0) +
              (h2 >= 3 && h2 <= 5 ? 1 : 0);
    bool in_grid = std::abs(ps2) <= cfg_.side_range && pf2 >= 0 && pf2 <= cfg_.front_range;
    bool allowed = on_track(ps2, pf2) || in_extension(e, ps2, pf2) || in_final(e, ps2, pf2);
    if (in_grid && allowed) return index(ps2, pf2, h2, s.tau + 1);
    return err;
  }
  // tau == horizon: remap into the next segment's entry frame, or fail.
  if (in_final(e, s.pos_side, s.pos_front)) {
    switch (e) {
      case Segment::Left:
        return index(cfg_.exit_band - s.pos_front, cfg_.start_front, ((s.heading - 2) % 8 + 8) % 8,
                     1);
      case Segment::Right:
        return index(s.pos_front - cfg_.exit_band, cfg_.start_front, (s.heading + 2) % 8, 1);
      case Segment::Straight:
        return index(s.pos_side, cfg_.start_front, s.heading, 1);
    }
  }
  return err;
}

int F1TenthModel::controller(Segment e, int estimate) const {
  State y = decode(estimate);
  int desired = 0;
  if (e == Segment::Left && y.pos_front <= cfg_.exit_band + 1) desired = 2;
  if (e == Segment::Right && y.pos_front <= cfg_.exit_band + 1) desired = 6;
  int diff = ((desired - y.heading) % 8 + 8) % 8;
  if (diff == 0) return 0;
  return diff <= 4 ? 1 : -1;
}

std::vector<int> F1TenthModel::nominal_starts() const {
  std::vector<int> out;
  for (int ps = -2; ps <= 2; ++ps)
    if (std::abs(ps) <= cfg_.side_range) out.push_back(index(ps, cfg_.start_front, 0, 1));
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic noise
// ---------------------------------------------------------------------------

PerceptionAbstraction synthetic_abstraction(
    int n, const SyntheticNoiseModel& noise,
    const std::function<std::vector<int>(int)>& neighbors) {
  if (noise.p < 0.0 || noise.p > 1.0) throw InvalidParameter("noise p outside [0,1]");
  std::vector<Eigen::Triplet<double>> triplets;
  switch (noise.kind) {
    case SyntheticNoiseModel::Kind::Perfect:
      return PerceptionAbstraction::identity(n);
    case SyntheticNoiseModel::Kind::Uniform:
      for (int s = 0; s < n; ++s) {
        if (n == 1) {
          triplets.emplace_back(s, s, 1.0);
          continue;
        }
        triplets.emplace_back(s, s, 1.0 - noise.p);
        if (noise.p > 0.0)
          for (int y = 0; y < n; ++y)
            if (y != s) triplets.emplace_back(s, y, noise.p / (n - 1));
      }
      break;
    case SyntheticNoiseModel::Kind::Neighbor: {
      if (!neighbors) throw InvalidParameter("neighbor noise needs an adjacency function");
      for (int s = 0; s < n; ++s) {
        std::vector<int> nb = neighbors(s);
        if (nb.empty() || noise.p == 0.0) {
          triplets.emplace_back(s, s, 1.0);
          continue;
        }
        triplets.emplace_back(s, s, 1.0 - noise.p);
        for (int y : nb) triplets.emplace_back(s, y, noise.p / static_cast<double>(nb.size()));
      }
      break;
    }
  }
  SpMat probs(n, n);
  probs.setFromTriplets(triplets.begin(), triplets.end());
  PerceptionAbstraction alpha{std::move(probs)};
  alpha.validate();
  return alpha;
}

namespace {

std::vector<int> f1tenth_position_neighbors(const F1TenthModel& model, int state) {
  auto s = model.decode(state);
  const auto& cfg = model.config();
  std::vector<int> out;
  constexpr int dps[4] = {-1, 1, 0, 0};
  constexpr int dpf[4] = {0, 0, -1, 1};
  for (int d = 0; d < 4; ++d) {
    int ps = s.pos_side + dps[d], pf = s.pos_front + dpf[d];
    if (std::abs(ps) <= cfg.side_range && pf >= 0 && pf <= cfg.front_range)
      out.push_back(model.index(ps, pf, s.heading, s.tau));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

ClosedLoopDtmc build_f1tenth_chain(const F1TenthModel& model, Segment e,
                                   const SyntheticNoiseModel& noise) {
  if (noise.p < 0.0 || noise.p > 1.0) throw InvalidParameter("noise p outside [0,1]");
  const int n = model.num_nonerror();
  const int err = model.error_index();

  // One controller evaluation per estimate, shared by all rows.
  std::vector<signed char> control_of(n);
  for (int y = 0; y < n; ++y) control_of[y] = static_cast<signed char>(model.controller(e, y));
  long control_count[3] = {0, 0, 0};  // estimates mapped to u = -1, 0, 1
  for (int y = 0; y < n; ++y) ++control_count[control_of[y] + 1];

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<size_t>(n) * 2 + 1);
  double mass[3];
  for (int s = 0; s < n; ++s) {
    mass[0] = mass[1] = mass[2] = 0.0;
    const int truth_u = control_of[s] + 1;
    switch (noise.kind) {
      case SyntheticNoiseModel::Kind::Perfect:
        mass[truth_u] = 1.0;
        break;
      case SyntheticNoiseModel::Kind::Uniform: {
        // Aggregate the uniform off-truth mass per control without touching
        // individual estimates: count how many estimates map to each u.
        if (n == 1) {
          mass[truth_u] = 1.0;
          break;
        }
        for (int u = 0; u < 3; ++u)
          mass[u] = noise.p * static_cast<double>(control_count[u] - (u == truth_u ? 1 : 0)) /
                    static_cast<double>(n - 1);
        mass[truth_u] += 1.0 - noise.p;
        break;
      }
      case SyntheticNoiseModel::Kind::Neighbor: {
        std::vector<int> nb = f1tenth_position_neighbors(model, s);
        if (nb.empty() || noise.p == 0.0) {
          mass[truth_u] = 1.0;
          break;
        }
        mass[truth_u] = 1.0 - noise.p;
        for (int y : nb) mass[control_of[y] + 1] += noise.p / static_cast<double>(nb.size());
        break;
      }
    }
    for (int u = 0; u < 3; ++u)
      if (mass[u] > 0.0) triplets.emplace_back(s, model.dynamics(e, s, u - 1), mass[u]);
  }
  triplets.emplace_back(err, err, 1.0);
  SpMat transitions(err + 1, err + 1);
  transitions.setFromTriplets(triplets.begin(), triplets.end());
  return ClosedLoopDtmc{model.space(), std::move(transitions)};
}

ChainMap build_f1tenth_chains(const F1TenthModel& model,
                              const std::map<std::string, SyntheticNoiseModel>& noise) {
  ChainMap chains;
  for (Segment e : kAllSegments) {
    auto it = noise.find(segment_name(e));
    if (it == noise.end()) throw MissingEnvironment(segment_name(e));
    chains.emplace(segment_name(e), build_f1tenth_chain(model, e, it->second));
  }
  return chains;
}

ChainMap build_taxinet_chains(const std::map<std::string, PerceptionAbstraction>& abstractions) {
  StateSpace space = taxinet_space();
  std::vector<std::string> estimates(space.labels.begin(), space.labels.end() - 1);
  auto [g_base, f_base] = taxinet_example_tables();
  ChainMap chains;
  for (const auto& [env, alpha] : abstractions) {
    ControllerTable g;
    DynamicsTable f;
    g.entries[env] = g_base.entries.at("bright");
    f.entries[env] = f_base.entries.at("bright");
    chains.emplace(env, compose_closed_loop(space, estimates, alpha, g, f, env));
  }
  return chains;
}

}  // namespace scenver
