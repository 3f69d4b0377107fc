#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "itdt/env/world.hpp"

namespace itdt::ref {

struct RandomDecision {
  env::OffloadAssignment assignment;
  std::vector<env::UavControl> controls;
};

/// Any assignment (DEFER included when allowed) and controls with weights
/// slightly outside [-1, 1] so clipping is exercised.
inline RandomDecision random_decision(const env::WorldState& s, std::mt19937_64& rng) {
  const std::size_t R = s.sensors.size(), N = s.uavs.size();
  RandomDecision d;
  d.assignment = env::OffloadAssignment::all_deferred(R);
  std::uniform_int_distribution<std::size_t> pick(s.config.allow_defer ? 0 : 1, N);
  for (auto& t : d.assignment.target) {
    const std::size_t k = N == 0 ? 0 : pick(rng);
    if (k > 0) t = k - 1;
  }
  std::uniform_real_distribution<double> w(-1.2, 1.2), ang(-4.0, 4.0), v(0.0, 200.0);
  for (std::size_t n = 0; n < N; ++n) {
    env::UavControl c;
    c.angle = ang(rng);
    c.speed = v(rng);
    c.raw_weights.resize(R);
    for (auto& x : c.raw_weights) x = w(rng);
    d.controls.push_back(std::move(c));
  }
  return d;
}

/// A world config with every sampled range and constant perturbed.
inline env::WorldConfig random_world(std::mt19937_64& rng, std::size_t max_uavs = 3,
                                     std::size_t max_sensors = 6) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  env::WorldConfig c;
  c.num_uavs = 1 + static_cast<std::size_t>(u(rng) * max_uavs) % max_uavs;
  c.num_sensors = static_cast<std::size_t>(u(rng) * (max_sensors + 1)) % (max_sensors + 1);
  c.area_side = 200.0 + 1800.0 * u(rng);
  c.uav_altitude = 20.0 + 100.0 * u(rng);
  c.tx_power = 0.01 + 0.5 * u(rng);
  c.ref_gain = 0.5 + u(rng);
  c.noise_power = 1e-14 + 1e-12 * u(rng);
  c.bandwidth = 1e5 + 5e6 * u(rng);
  c.steps_min = 50.0 * u(rng);
  c.steps_max = {300.0 + 100.0 * u(rng), 500.0 + 200.0 * u(rng)};
  c.fidelity_min = 20.0 * u(rng);
  c.fidelity_max = {30.0 + 20.0 * u(rng), 100.0 + 100.0 * u(rng)};
  c.uav_slot_budget = 200.0 + 1000.0 * u(rng);
  c.uav_freq = {80.0 + 50.0 * u(rng), 200.0 + 300.0 * u(rng)};
  c.phi1 = 0.1 + 2.0 * u(rng);
  c.phi2 = 20.0 * u(rng);
  c.deadline = 0.5 + 4.0 * u(rng);
  c.lambda_D = 3.0 * u(rng);
  c.lambda_F = 3.0 * u(rng);
  c.allow_defer = u(rng) < 0.8;
  c.slots_per_episode = 10;
  return c;
}

}  // namespace itdt::ref
