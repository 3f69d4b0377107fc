#pragma once

#include <span>
#include <vector>

#include "itdt/env/config.hpp"

namespace itdt::env {

/// Horizontal position in meters; altitude is implied by the entity kind.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Vec2&) const = default;
};

/// Free-space power gain h0 * d^-2 at 3-D distance d.
[[nodiscard]] double channel_gain(double h0, double distance_3d);

/// Shannon rate B * log2(1 + P * gain^2 / noise). The gain is squared as
/// |h|^2 of the amplitude-style gain above, giving an effective d^-4 law.
[[nodiscard]] double transmission_rate(double tx_power, double gain, double noise_sq,
                                       double bandwidth);

[[nodiscard]] double transmission_delay(bool assigned, double data_bits, double rate);

[[nodiscard]] double inference_delay(double steps, double freq);

/// Piecewise-linear fidelity: 0 below s_min, ramp to f_max at s_max, flat above.
[[nodiscard]] double fidelity_gain(double steps, double s_min, double s_max, double f_max);

inline constexpr double kWeightEpsilon = 1e-6;

/// Result of splitting one UAV's slot budget over its assigned tasks.
struct StepSplit {
  std::vector<double> unclamped;  ///< budget * w'/sum(w'), sums to budget
  std::vector<double> allocated;  ///< unclamped clamped into [0, cap]
};

/// Maps raw weights in [-1, 1] to (w + 1)/2 + eps shares of the budget and
/// clamps each share to its task cap. Budget lost to clamping is forfeited.
[[nodiscard]] StepSplit split_steps(std::span<const double> raw_weights, double budget,
                                    std::span<const double> per_task_caps);

/// Clamped allocations only.
[[nodiscard]] std::vector<double> normalize_steps(std::span<const double> raw_weights,
                                                  double budget,
                                                  std::span<const double> per_task_caps);

/// Moves at speed clamped to [v_min, v_max] along angle for one slot, then
/// clamps both coordinates into the flight area.
[[nodiscard]] Vec2 advance_uav(Vec2 position, double angle_rad, double speed,
                               const WorldConfig& config);

[[nodiscard]] double violation_penalty(double delay, double deadline, double fidelity,
                                       double fidelity_floor, double lambda_D, double lambda_F);

/// Sum over tasks of phi1 * F - phi2 * d.
[[nodiscard]] double slot_utility(std::span<const double> fidelities,
                                  std::span<const double> delays, double phi1, double phi2);

/// 3-D separation between a UAV at altitude and a ground sensor.
[[nodiscard]] double uav_sensor_distance(Vec2 uav, Vec2 sensor, double altitude);

}  // namespace itdt::env
