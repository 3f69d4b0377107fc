#include "itdt/env/formulas.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "itdt/errors.hpp"

namespace itdt::env {

double channel_gain(double h0, double distance_3d) {
  if (!(distance_3d > 0.0)) throw InvalidInput("channel_gain: distance must be > 0");
  return h0 / (distance_3d * distance_3d);
}

double transmission_rate(double tx_power, double gain, double noise_sq, double bandwidth) {
  if (!(noise_sq > 0.0)) throw InvalidInput("transmission_rate: noise power must be > 0");
  if (gain < 0.0) throw InvalidInput("transmission_rate: gain must be >= 0");
  return bandwidth * std::log2(1.0 + tx_power * gain * gain / noise_sq);
}

double transmission_delay(bool assigned, double data_bits, double rate) {
  if (!assigned) return 0.0;
  if (!(rate > 0.0)) throw InvalidInput("transmission_delay: zero rate on an assigned link");
  return data_bits / rate;
}

double inference_delay(double steps, double freq) {
  if (!(freq > 0.0)) throw InvalidInput("inference_delay: frequency must be > 0");
  return steps / freq;
}

double fidelity_gain(double steps, double s_min, double s_max, double f_max) {
  if (!(s_min < s_max)) throw ConfigError("fidelity_gain: require s_min < s_max");
  if (steps < s_min) return 0.0;
  if (steps > s_max) return f_max;
  return f_max * (steps - s_min) / (s_max - s_min);
}

StepSplit split_steps(std::span<const double> raw_weights, double budget,
                      std::span<const double> per_task_caps) {
  if (raw_weights.size() != per_task_caps.size()) {
    throw ContractError("normalize_steps: weights and caps differ in length");
  }
  StepSplit out;
  if (raw_weights.empty()) return out;
  if (!(budget > 0.0)) throw InvalidInput("normalize_steps: budget must be > 0");

  std::vector<double> shares(raw_weights.size());
  std::transform(raw_weights.begin(), raw_weights.end(), shares.begin(), [](double w) {
    return (std::clamp(w, -1.0, 1.0) + 1.0) / 2.0 + kWeightEpsilon;
  });
  const double total = std::accumulate(shares.begin(), shares.end(), 0.0);

  out.unclamped.resize(shares.size());
  out.allocated.resize(shares.size());
  for (std::size_t i = 0; i < shares.size(); ++i) {
    out.unclamped[i] = budget * shares[i] / total;
    out.allocated[i] = std::clamp(out.unclamped[i], 0.0, std::max(per_task_caps[i], 0.0));
  }
  return out;
}

std::vector<double> normalize_steps(std::span<const double> raw_weights, double budget,
                                    std::span<const double> per_task_caps) {
  return split_steps(raw_weights, budget, per_task_caps).allocated;
}

Vec2 advance_uav(Vec2 position, double angle_rad, double speed, const WorldConfig& config) {
  const double v = std::clamp(speed, config.v_min, config.v_max);
  const double step = v * config.slot_duration;
  return {std::clamp(position.x + step * std::cos(angle_rad), 0.0, config.area_side),
          std::clamp(position.y + step * std::sin(angle_rad), 0.0, config.area_side)};
}

double violation_penalty(double delay, double deadline, double fidelity, double fidelity_floor,
                         double lambda_D, double lambda_F) {
  return lambda_D * std::max(delay - deadline, 0.0) +
         lambda_F * std::max(fidelity_floor - fidelity, 0.0);
}

double slot_utility(std::span<const double> fidelities, std::span<const double> delays,
                    double phi1, double phi2) {
  if (fidelities.size() != delays.size()) {
    throw InvalidInput("slot_utility: " + std::to_string(fidelities.size()) +
                       " fidelities vs " + std::to_string(delays.size()) + " delays");
  }
  double u = 0.0;
  for (std::size_t r = 0; r < fidelities.size(); ++r) u += phi1 * fidelities[r] - phi2 * delays[r];
  return u;
}

double uav_sensor_distance(Vec2 uav, Vec2 sensor, double altitude) {
  const double dx = uav.x - sensor.x;
  const double dy = uav.y - sensor.y;
  return std::sqrt(dx * dx + dy * dy + altitude * altitude);
}

}  // namespace itdt::env
