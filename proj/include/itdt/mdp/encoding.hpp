#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "itdt/env/world.hpp"

namespace itdt::mdp {

/// Fixed observation/action dimensions and normalization constants for one world shape.
struct ObservationLayout {
  std::size_t num_uavs = 0;
  std::size_t num_sensors = 0;
  bool allow_defer = true;
  double area_side = 1000.0;
  double step_ref = 1000.0;
  double fidelity_ref = 150.0;
  double budget_ref = 1000.0;

  [[nodiscard]] static ObservationLayout from_config(const env::WorldConfig& config);

  [[nodiscard]] std::size_t sensor_obs_dim() const { return 3 + 3 * num_uavs; }
  [[nodiscard]] std::size_t uav_obs_dim() const { return 2 + 5 * num_sensors; }
  [[nodiscard]] std::size_t sensor_action_dim() const { return num_uavs + (allow_defer ? 1 : 0); }
  [[nodiscard]] std::size_t uav_action_dim() const { return 2 + num_sensors; }
  [[nodiscard]] std::size_t num_agents() const { return num_sensors + num_uavs; }
  [[nodiscard]] std::size_t obs_dim(std::size_t agent) const;
  [[nodiscard]] std::size_t action_dim(std::size_t agent) const;
  [[nodiscard]] bool is_sensor(std::size_t agent) const { return agent < num_sensors; }
  /// Width of the centralized critic input.
  [[nodiscard]] std::size_t joint_dim() const;
};

using Vector = std::vector<double>;

/// [S_max, x_r, y_r, then per UAV: x_n, y_n, budget_n], normalized.
[[nodiscard]] Vector encode_sensor_obs(const env::WorldState& state, std::size_t sensor_id,
                                       const ObservationLayout& layout);

/// Assignment-free view of UAV n for the critic: same layout as the UAV
/// observation, every sensor block filled and every indicator zero.
[[nodiscard]] Vector encode_uav_critic_view(const env::WorldState& state, std::size_t uav_id,
                                            const ObservationLayout& layout);

/// [x_n, y_n, then per sensor: assigned, x_r, y_r, S_max, F_max]; blocks of
/// sensors not offloading to this UAV are all zero.
[[nodiscard]] Vector encode_uav_obs(const env::WorldState& state, std::size_t uav_id,
                                    const env::OffloadAssignment& assignment,
                                    const ObservationLayout& layout);

/// Argmax with lowest-index tie-break. With defer enabled, component 0 defers
/// and component k selects UAV k-1.
[[nodiscard]] std::optional<std::size_t> decode_offload(std::span<const double> raw_action,
                                                        const ObservationLayout& layout);

[[nodiscard]] env::OffloadAssignment decode_assignment(const std::vector<Vector>& sensor_actions,
                                                       const ObservationLayout& layout);

/// [theta, v, w_1..w_R] in [-1, 1] -> angle theta*pi, speed on [v_min, v_max], raw weights.
[[nodiscard]] env::UavControl decode_uav_control(std::span<const double> raw_action,
                                                 const env::WorldConfig& config);

/// U_t minus total penalty, divided by scale.
[[nodiscard]] double compute_reward(const env::SlotOutcome& outcome, double scale = 1.0);

/// Concatenates all observations (sensors then UAVs, ascending id) followed by
/// all actions in the same agent order.
[[nodiscard]] Vector global_critic_input(const std::vector<Vector>& observations,
                                         const std::vector<Vector>& actions,
                                         const ObservationLayout& layout);

/// Offset of agent's action block inside the global critic input.
[[nodiscard]] std::size_t action_offset(const ObservationLayout& layout, std::size_t agent);

}  // namespace itdt::mdp
