#include "itdt/mdp/encoding.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "itdt/errors.hpp"

namespace itdt::mdp {

ObservationLayout ObservationLayout::from_config(const env::WorldConfig& config) {
  ObservationLayout layout;
  layout.num_uavs = config.num_uavs;
  layout.num_sensors = config.num_sensors;
  layout.allow_defer = config.allow_defer;
  layout.area_side = config.area_side;
  return layout;
}

std::size_t ObservationLayout::obs_dim(std::size_t agent) const {
  return is_sensor(agent) ? sensor_obs_dim() : uav_obs_dim();
}

std::size_t ObservationLayout::action_dim(std::size_t agent) const {
  return is_sensor(agent) ? sensor_action_dim() : uav_action_dim();
}

std::size_t ObservationLayout::joint_dim() const {
  return num_sensors * (sensor_obs_dim() + sensor_action_dim()) +
         num_uavs * (uav_obs_dim() + uav_action_dim());
}

Vector encode_sensor_obs(const env::WorldState& state, std::size_t sensor_id,
                         const ObservationLayout& layout) {
  if (sensor_id >= state.sensors.size()) throw ContractError("unknown sensor id");
  const auto& s = state.sensors[sensor_id];
  const double l = layout.area_side;
  Vector obs;
  obs.reserve(layout.sensor_obs_dim());
  obs.push_back(s.steps_max / layout.step_ref);
  obs.push_back(s.position.x / l);
  obs.push_back(s.position.y / l);
  for (const auto& uav : state.uavs) {
    obs.push_back(uav.position.x / l);
    obs.push_back(uav.position.y / l);
    obs.push_back(uav.slot_budget / layout.budget_ref);
  }
  return obs;
}

Vector encode_uav_obs(const env::WorldState& state, std::size_t uav_id,
                      const env::OffloadAssignment& assignment, const ObservationLayout& layout) {
  if (uav_id >= state.uavs.size()) throw ContractError("unknown UAV id");
  if (assignment.target.size() != state.sensors.size()) {
    throw ContractError("assignment does not match sensor count");
  }
  const double l = layout.area_side;
  Vector obs(layout.uav_obs_dim(), 0.0);
  obs[0] = state.uavs[uav_id].position.x / l;
  obs[1] = state.uavs[uav_id].position.y / l;
  for (std::size_t r = 0; r < state.sensors.size(); ++r) {
    if (!assignment.target[r] || *assignment.target[r] != uav_id) continue;
    const auto& s = state.sensors[r];
    double* block = obs.data() + 2 + 5 * r;
    block[0] = 1.0;
    block[1] = s.position.x / l;
    block[2] = s.position.y / l;
    block[3] = s.steps_max / layout.step_ref;
    block[4] = s.fidelity_max / layout.fidelity_ref;
  }
  return obs;
}

Vector encode_uav_critic_view(const env::WorldState& state, std::size_t uav_id,
                              const ObservationLayout& layout) {
  if (uav_id >= state.uavs.size()) throw ContractError("unknown UAV id");
  const double l = layout.area_side;
  Vector obs(layout.uav_obs_dim(), 0.0);
  obs[0] = state.uavs[uav_id].position.x / l;
  obs[1] = state.uavs[uav_id].position.y / l;
  for (std::size_t r = 0; r < state.sensors.size(); ++r) {
    const auto& s = state.sensors[r];
    double* block = obs.data() + 2 + 5 * r;
    block[1] = s.position.x / l;
    block[2] = s.position.y / l;
    block[3] = s.steps_max / layout.step_ref;
    block[4] = s.fidelity_max / layout.fidelity_ref;
  }
  return obs;
}

std::optional<std::size_t> decode_offload(std::span<const double> raw_action,
                                          const ObservationLayout& layout) {
  if (raw_action.size() != layout.sensor_action_dim()) {
    throw ContractError("offload action has length " + std::to_string(raw_action.size()) +
                        ", expected " + std::to_string(layout.sensor_action_dim()));
  }
  if (raw_action.empty()) return std::nullopt;
  // max_element returns the first maximum: lowest index wins ties.
  const auto k = static_cast<std::size_t>(
      std::max_element(raw_action.begin(), raw_action.end()) - raw_action.begin());
  if (!layout.allow_defer) return k;
  if (k == 0) return std::nullopt;
  return k - 1;
}

env::OffloadAssignment decode_assignment(const std::vector<Vector>& sensor_actions,
                                         const ObservationLayout& layout) {
  if (sensor_actions.size() != layout.num_sensors) {
    throw ContractError("expected one action per sensor");
  }
  env::OffloadAssignment out = env::OffloadAssignment::all_deferred(layout.num_sensors);
  for (std::size_t r = 0; r < sensor_actions.size(); ++r) {
    out.target[r] = decode_offload(sensor_actions[r], layout);
  }
  return out;
}

env::UavControl decode_uav_control(std::span<const double> raw_action,
                                   const env::WorldConfig& config) {
  if (raw_action.size() != 2 + config.num_sensors) {
    throw ContractError("UAV action has length " + std::to_string(raw_action.size()) +
                        ", expected " + std::to_string(2 + config.num_sensors));
  }
  auto clip = [](double v) { return std::clamp(v, -1.0, 1.0); };
  env::UavControl c;
  c.angle = clip(raw_action[0]) * std::numbers::pi;
  c.speed = config.v_min + (clip(raw_action[1]) + 1.0) / 2.0 * (config.v_max - config.v_min);
  c.raw_weights.resize(config.num_sensors);
  std::transform(raw_action.begin() + 2, raw_action.end(), c.raw_weights.begin(), clip);
  return c;
}

double compute_reward(const env::SlotOutcome& outcome, double scale) {
  return (outcome.utility - outcome.total_penalty()) / scale;
}

std::size_t action_offset(const ObservationLayout& layout, std::size_t agent) {
  std::size_t offset = layout.num_sensors * layout.sensor_obs_dim() +
                       layout.num_uavs * layout.uav_obs_dim();
  for (std::size_t i = 0; i < agent; ++i) offset += layout.action_dim(i);
  return offset;
}

Vector global_critic_input(const std::vector<Vector>& observations,
                           const std::vector<Vector>& actions, const ObservationLayout& layout) {
  const std::size_t agents = layout.num_agents();
  if (observations.size() != agents || actions.size() != agents) {
    throw ContractError("critic input needs one observation and one action per agent");
  }
  Vector out;
  out.reserve(layout.joint_dim());
  for (std::size_t i = 0; i < agents; ++i) {
    if (observations[i].size() != layout.obs_dim(i)) {
      throw ContractError("agent " + std::to_string(i) + " observation has wrong length");
    }
    out.insert(out.end(), observations[i].begin(), observations[i].end());
  }
  for (std::size_t i = 0; i < agents; ++i) {
    if (actions[i].size() != layout.action_dim(i)) {
      throw ContractError("agent " + std::to_string(i) + " action has wrong length");
    }
    out.insert(out.end(), actions[i].begin(), actions[i].end());
  }
  return out;
}

}  // namespace itdt::mdp
