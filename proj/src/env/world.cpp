#include "itdt/env/world.hpp"

#include <string>

#include "itdt/errors.hpp"

namespace itdt::env {

OffloadAssignment OffloadAssignment::all_deferred(std::size_t num_sensors) {
  return {std::vector<std::optional<std::size_t>>(num_sensors)};
}

OffloadAssignment OffloadAssignment::from_indicators(const std::vector<std::vector<int>>& alpha,
                                                     std::size_t num_sensors) {
  OffloadAssignment out = all_deferred(num_sensors);
  for (std::size_t n = 0; n < alpha.size(); ++n) {
    if (alpha[n].size() != num_sensors) {
      throw ContractError("offload indicators: row " + std::to_string(n) + " has wrong length");
    }
    for (std::size_t r = 0; r < num_sensors; ++r) {
      if (alpha[n][r] == 0) continue;
      if (alpha[n][r] != 1) throw ContractError("offload indicators must be 0 or 1");
      if (out.target[r]) {
        throw ContractError("sensor " + std::to_string(r) + " offloads to more than one UAV");
      }
      out.target[r] = n;
    }
  }
  return out;
}

std::vector<std::size_t> OffloadAssignment::sensors_of(std::size_t uav) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < target.size(); ++r) {
    if (target[r] && *target[r] == uav) out.push_back(r);
  }
  return out;
}

double SlotOutcome::total_penalty() const {
  double p = 0.0;
  for (const auto& t : tasks) p += t.penalty;
  return p;
}

std::size_t SlotOutcome::penalty_count() const {
  std::size_t c = 0;
  for (const auto& t : tasks) c += t.penalty > 0.0 ? 1 : 0;
  return c;
}

namespace {

double sample(std::mt19937_64& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void resample_data_sizes(WorldState& s) {
  for (auto& sensor : s.sensors) {
    sensor.data_size = sample(s.rng, s.config.data_size_range.lo, s.config.data_size_range.hi);
  }
}

}  // namespace

WorldState env_reset(const WorldConfig& config, std::uint64_t seed) {
  config.validate();
  WorldState s;
  s.config = config;
  s.rng.seed(seed);
  const double l = config.area_side;

  s.sensors.resize(config.num_sensors);
  for (std::size_t r = 0; r < config.num_sensors; ++r) {
    auto& sensor = s.sensors[r];
    sensor.id = r;
    sensor.position.x = sample(s.rng, 0.0, l);
    sensor.position.y = sample(s.rng, 0.0, l);
    sensor.steps_max = sample(s.rng, config.steps_max.lo, config.steps_max.hi);
    sensor.fidelity_max = sample(s.rng, config.fidelity_max.lo, config.fidelity_max.hi);
  }
  s.uavs.resize(config.num_uavs);
  for (std::size_t n = 0; n < config.num_uavs; ++n) {
    auto& uav = s.uavs[n];
    uav.id = n;
    uav.position.x = sample(s.rng, 0.0, l);
    uav.position.y = sample(s.rng, 0.0, l);
    uav.slot_budget = config.uav_slot_budget;
    uav.freq = sample(s.rng, config.uav_freq.lo, config.uav_freq.hi);
  }
  resample_data_sizes(s);
  return s;
}

void check_assignment(const WorldState& state, const OffloadAssignment& offload) {
  if (offload.target.size() != state.sensors.size()) {
    throw ContractError("assignment covers " + std::to_string(offload.target.size()) +
                        " sensors, world has " + std::to_string(state.sensors.size()));
  }
  for (std::size_t r = 0; r < offload.target.size(); ++r) {
    const auto& t = offload.target[r];
    if (!t) {
      if (!state.config.allow_defer) {
        throw ContractError("sensor " + std::to_string(r) + " deferred but allow_defer is off");
      }
      continue;
    }
    if (*t >= state.uavs.size()) {
      throw ContractError("sensor " + std::to_string(r) + " targets unknown UAV " +
                          std::to_string(*t));
    }
  }
}

SlotOutcome evaluate_slot(const WorldState& state, const OffloadAssignment& offload,
                          const std::vector<UavControl>& controls) {
  check_assignment(state, offload);
  if (controls.size() != state.uavs.size()) {
    throw ContractError("expected one control per UAV");
  }
  const auto& cfg = state.config;
  const std::size_t R = state.sensors.size();

  SlotOutcome out;
  out.tasks.resize(R);
  for (std::size_t n = 0; n < state.uavs.size(); ++n) {
    const auto assigned = offload.sensors_of(n);
    if (assigned.empty()) continue;
    if (controls[n].raw_weights.size() != R) {
      throw ContractError("UAV " + std::to_string(n) + " control needs one weight per sensor");
    }
    std::vector<double> weights;
    std::vector<double> caps;
    for (std::size_t r : assigned) {
      weights.push_back(controls[n].raw_weights[r]);
      caps.push_back(state.sensors[r].steps_max);
    }
    const auto steps = normalize_steps(weights, state.uavs[n].slot_budget, caps);

    const auto& uav = state.uavs[n];
    for (std::size_t k = 0; k < assigned.size(); ++k) {
      const auto& sensor = state.sensors[assigned[k]];
      auto& task = out.tasks[assigned[k]];
      task.uav = n;
      task.steps = steps[k];
      task.fidelity = fidelity_gain(task.steps, cfg.steps_min, sensor.steps_max,
                                    sensor.fidelity_max);
      const double d = uav_sensor_distance(uav.position, sensor.position, cfg.uav_altitude);
      const double rate = transmission_rate(cfg.tx_power, channel_gain(cfg.ref_gain_linear(), d),
                                            cfg.noise_power, cfg.bandwidth);
      task.trans_delay = transmission_delay(true, sensor.data_size, rate);
      task.infer_delay = inference_delay(task.steps, uav.freq);
      task.delay = task.trans_delay + task.infer_delay;
    }
  }

  std::vector<double> fidelities(R);
  std::vector<double> delays(R);
  for (std::size_t r = 0; r < R; ++r) {
    auto& task = out.tasks[r];
    task.penalty = violation_penalty(task.delay, cfg.deadline, task.fidelity, cfg.fidelity_min,
                                     cfg.lambda_D, cfg.lambda_F);
    fidelities[r] = task.fidelity;
    delays[r] = task.delay;
  }
  out.utility = slot_utility(fidelities, delays, cfg.phi1, cfg.phi2);
  return out;
}

SlotOutcome env_step(WorldState& state, const OffloadAssignment& offload,
                     const std::vector<UavControl>& controls) {
  if (state.episode_done()) throw ContractError("env_step called after the final slot");
  SlotOutcome out = evaluate_slot(state, offload, controls);
  for (std::size_t n = 0; n < state.uavs.size(); ++n) {
    state.uavs[n].position =
        advance_uav(state.uavs[n].position, controls[n].angle, controls[n].speed, state.config);
  }
  resample_data_sizes(state);
  ++state.slot;
  return out;
}

}  // namespace itdt::env
