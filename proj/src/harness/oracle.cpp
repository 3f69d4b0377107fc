#include "itdt/harness/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "itdt/errors.hpp"

namespace itdt::harness {

OracleGrid OracleGrid::standard(const env::WorldConfig& config) {
  OracleGrid g;
  g.weight_levels = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (int k = 0; k < 8; ++k) g.angles.push_back(-std::numbers::pi + k * std::numbers::pi / 4.0);
  g.speeds = {config.v_min, 0.5 * (config.v_min + config.v_max), config.v_max};
  return g;
}

namespace {

std::vector<double> with_midpoints(const std::vector<double>& v) {
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(v[i]);
    if (i + 1 < v.size()) out.push_back(0.5 * (v[i] + v[i + 1]));
  }
  return out;
}

}  // namespace

OracleGrid OracleGrid::refined() const {
  OracleGrid g;
  g.weight_levels = with_midpoints(weight_levels);
  g.speeds = with_midpoints(speeds);
  g.angles = with_midpoints(angles);
  if (angles.size() >= 2) {
    const double wrap = angles.front() + 2.0 * std::numbers::pi;
    g.angles.push_back(0.5 * (angles.back() + wrap));
  }
  return g;
}

namespace {

struct SubsetBest {
  double value = 0.0;
  std::vector<double> raw_weights;  ///< per served sensor, ascending id
};

// Reward contribution (phi1 F - phi2 d - penalty) of one UAV serving `served`.
double uav_value(const env::WorldState& s, std::size_t n, const std::vector<std::size_t>& served,
                 const std::vector<double>& raw, const std::vector<double>& trans) {
  const auto& cfg = s.config;
  std::vector<double> caps;
  caps.reserve(served.size());
  for (std::size_t r : served) caps.push_back(s.sensors[r].steps_max);
  const auto steps = env::normalize_steps(raw, s.uavs[n].slot_budget, caps);
  double v = 0.0;
  for (std::size_t k = 0; k < served.size(); ++k) {
    const auto& sensor = s.sensors[served[k]];
    const double f = env::fidelity_gain(steps[k], cfg.steps_min, sensor.steps_max,
                                        sensor.fidelity_max);
    const double d = trans[served[k]] + env::inference_delay(steps[k], s.uavs[n].freq);
    v += cfg.phi1 * f - cfg.phi2 * d -
         env::violation_penalty(d, cfg.deadline, f, cfg.fidelity_min, cfg.lambda_D, cfg.lambda_F);
  }
  return v;
}

}  // namespace

OracleResult brute_force_slot_oracle(const env::WorldState& state, const OracleGrid& grid) {
  const std::size_t R = state.sensors.size();
  const std::size_t N = state.uavs.size();
  if (R > kOracleMaxSensors || N > kOracleMaxUavs) {
    throw SizeError("oracle refuses R=" + std::to_string(R) + ", N=" + std::to_string(N) +
                    " (limits R<=" + std::to_string(kOracleMaxSensors) +
                    ", N<=" + std::to_string(kOracleMaxUavs) + ")");
  }
  if (grid.weight_levels.empty() || grid.angles.empty() || grid.speeds.empty()) {
    throw ConfigError("oracle grids must be nonempty");
  }
  const auto& cfg = state.config;
  if (!cfg.allow_defer && N == 0 && R > 0) throw ContractError("no feasible assignment");

  OracleResult result;
  result.controls.resize(N);
  for (auto& c : result.controls) {
    c.angle = grid.angles.front();
    c.speed = grid.speeds.front();
    c.raw_weights.assign(R, -1.0);
  }
  result.assignment = env::OffloadAssignment::all_deferred(R);
  if (R == 0) {
    result.evaluations = 1;
    return result;
  }

  // Per UAV, per served-sensor subset (bitmask): best grid value and weights.
  const std::size_t subsets = std::size_t{1} << R;
  const std::size_t levels = grid.weight_levels.size();
  std::vector<std::vector<SubsetBest>> best(N, std::vector<SubsetBest>(subsets));
  for (std::size_t n = 0; n < N; ++n) {
    std::vector<double> trans(R);
    for (std::size_t r = 0; r < R; ++r) {
      const double d =
          env::uav_sensor_distance(state.uavs[n].position, state.sensors[r].position, cfg.uav_altitude);
      const double rate = env::transmission_rate(
          cfg.tx_power, env::channel_gain(cfg.ref_gain_linear(), d), cfg.noise_power, cfg.bandwidth);
      trans[r] = env::transmission_delay(true, state.sensors[r].data_size, rate);
    }
    for (std::size_t mask = 1; mask < subsets; ++mask) {
      std::vector<std::size_t> served;
      for (std::size_t r = 0; r < R; ++r) {
        if (mask & (std::size_t{1} << r)) served.push_back(r);
      }
      std::vector<std::size_t> digit(served.size(), 0);
      std::vector<double> raw(served.size());
      bool first = true;
      SubsetBest& b = best[n][mask];
      while (true) {
        for (std::size_t k = 0; k < served.size(); ++k) {
          raw[k] = 2.0 * grid.weight_levels[digit[k]] - 1.0;
        }
        const double v = uav_value(state, n, served, raw, trans);
        ++result.evaluations;
        if (first || v > b.value) {
          b.value = v;
          b.raw_weights = raw;
          first = false;
        }
        std::size_t k = served.size();
        while (k > 0 && ++digit[k - 1] == levels) digit[--k] = 0;
        if (k == 0) break;
      }
    }
  }

  const double defer_value =
      -env::violation_penalty(0.0, cfg.deadline, 0.0, cfg.fidelity_min, cfg.lambda_D, cfg.lambda_F);

  // Enumerate assignments; option 0 is DEFER when allowed, then UAV indices.
  const std::size_t options = N + (cfg.allow_defer ? 1 : 0);
  std::vector<std::size_t> choice(R, 0);
  bool have = false;
  std::vector<std::size_t> best_choice;
  while (true) {
    std::vector<std::size_t> masks(N, 0);
    double v = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      const bool deferred = cfg.allow_defer && choice[r] == 0;
      if (deferred) {
        v += defer_value;
      } else {
        masks[choice[r] - (cfg.allow_defer ? 1 : 0)] |= std::size_t{1} << r;
      }
    }
    for (std::size_t n = 0; n < N; ++n) {
      if (masks[n]) v += best[n][masks[n]].value;
    }
    if (!have || v > result.value) {
      result.value = v;
      best_choice = choice;
      have = true;
    }
    std::size_t r = R;
    while (r > 0 && ++choice[r - 1] == options) choice[--r] = 0;
    if (r == 0) break;
  }

  std::vector<std::size_t> masks(N, 0);
  for (std::size_t r = 0; r < R; ++r) {
    if (cfg.allow_defer && best_choice[r] == 0) continue;
    const std::size_t n = best_choice[r] - (cfg.allow_defer ? 1 : 0);
    result.assignment.target[r] = n;
    masks[n] |= std::size_t{1} << r;
  }
  for (std::size_t n = 0; n < N; ++n) {
    if (!masks[n]) continue;
    const auto& b = best[n][masks[n]];
    std::size_t k = 0;
    for (std::size_t r = 0; r < R; ++r) {
      if (masks[n] & (std::size_t{1} << r)) result.controls[n].raw_weights[r] = b.raw_weights[k++];
    }
  }
  // Moves do not change the slot value; count them as enumerated once.
  result.evaluations += N * grid.angles.size() * grid.speeds.size();
  return result;
}

}  // namespace itdt::harness
