#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "itdt/env/config.hpp"
#include "itdt/env/formulas.hpp"

namespace itdt::env {

struct SensorState {
  std::size_t id = 0;
  Vec2 position;
  double steps_max = 0.0;
  double fidelity_max = 0.0;
  /// Bits to upload this slot; resampled after every step.
  double data_size = 0.0;

  bool operator==(const SensorState&) const = default;
};

struct UavState {
  std::size_t id = 0;
  Vec2 position;
  double slot_budget = 0.0;
  double freq = 0.0;

  bool operator==(const UavState&) const = default;
};

/// One target per sensor: a UAV index, or nullopt to defer the task.
/// The representation makes "at most one UAV per sensor" structural.
struct OffloadAssignment {
  std::vector<std::optional<std::size_t>> target;

  [[nodiscard]] static OffloadAssignment all_deferred(std::size_t num_sensors);
  /// Builds from an N x R 0/1 indicator matrix alpha[n][r]; throws
  /// ContractError if any column has more than one 1.
  [[nodiscard]] static OffloadAssignment from_indicators(
      const std::vector<std::vector<int>>& alpha, std::size_t num_sensors);

  /// Sensor ids assigned to uav, ascending.
  [[nodiscard]] std::vector<std::size_t> sensors_of(std::size_t uav) const;

  bool operator==(const OffloadAssignment&) const = default;
};

/// Decoded per-UAV decision for one slot.
struct UavControl {
  double angle = 0.0;  ///< radians
  double speed = 0.0;  ///< m/s, clamped to [v_min, v_max] on use
  /// One raw weight per sensor id (length R); entries of unassigned sensors are ignored.
  std::vector<double> raw_weights;
};

struct WorldState {
  WorldConfig config;
  std::vector<SensorState> sensors;
  std::vector<UavState> uavs;
  std::size_t slot = 0;
  std::mt19937_64 rng;

  [[nodiscard]] bool episode_done() const { return slot >= config.slots_per_episode; }

  bool operator==(const WorldState&) const = default;
};

struct TaskOutcome {
  std::optional<std::size_t> uav;
  double steps = 0.0;
  double fidelity = 0.0;
  double trans_delay = 0.0;
  double infer_delay = 0.0;
  double delay = 0.0;  ///< trans_delay + infer_delay
  double penalty = 0.0;

  bool operator==(const TaskOutcome&) const = default;
};

struct SlotOutcome {
  std::vector<TaskOutcome> tasks;  ///< indexed by sensor id
  double utility = 0.0;

  [[nodiscard]] double total_penalty() const;
  [[nodiscard]] std::size_t penalty_count() const;

  bool operator==(const SlotOutcome&) const = default;
};

/// Validates config and samples a fresh episode. Identical (config, seed)
/// pairs produce identical states.
[[nodiscard]] WorldState env_reset(const WorldConfig& config, std::uint64_t seed);

/// Evaluates the slot with the current positions, then advances UAVs and
/// resamples data sizes. Returns the outcome of the slot just played.
SlotOutcome env_step(WorldState& state, const OffloadAssignment& offload,
                     const std::vector<UavControl>& controls);

/// Slot accounting without side effects: what env_step would report.
[[nodiscard]] SlotOutcome evaluate_slot(const WorldState& state, const OffloadAssignment& offload,
                                        const std::vector<UavControl>& controls);

/// Throws ContractError unless offload matches the state's shape and defer policy.
void check_assignment(const WorldState& state, const OffloadAssignment& offload);

}  // namespace itdt::env
