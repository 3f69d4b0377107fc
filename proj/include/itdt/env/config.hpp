#pragma once

#include <cstddef>
#include <string>

#include <nlohmann/json.hpp>

namespace itdt::env {

/// Closed interval [lo, hi] used for per-entity sampled quantities.
struct Range {
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const Range&) const = default;
};

/// Physical and economic constants of one scenario.
///
/// Distances are meters, times seconds, powers watts, data sizes bits and
/// compute in inference steps. Per-entity ranges (steps_max, fidelity_max,
/// uav_freq, data_size_range) are sampled uniformly at reset; data sizes are
/// resampled every slot.
struct WorldConfig {
  std::size_t num_uavs = 2;
  std::size_t num_sensors = 4;
  double area_side = 1000.0;
  double uav_altitude = 50.0;
  double slot_duration = 5.0;
  std::size_t slots_per_episode = 100;

  double v_min = 70.0;
  double v_max = 150.0;
  /// Maximal flight distance per slot; a non-positive value means v_max * slot_duration.
  double L_max = 0.0;

  double tx_power = 0.1;
  /// Channel gain at the 1 m reference distance, linear unless ref_gain_is_db.
  double ref_gain = 1.0;
  bool ref_gain_is_db = false;
  double noise_power = 1e-13;
  double bandwidth = 1e6;

  Range data_size_range{0.0, 192000.0};
  double steps_min = 0.0;
  Range steps_max{400.0, 600.0};
  double fidelity_min = 0.0;
  Range fidelity_max{50.0, 150.0};

  double uav_slot_budget = 800.0;
  Range uav_freq{100.0, 400.0};

  double phi1 = 1.0;
  double phi2 = 10.0;
  double deadline = 4.0;
  double lambda_D = 1.0;
  double lambda_F = 1.0;
  bool allow_defer = true;

  bool operator==(const WorldConfig&) const = default;

  /// Effective L_max after applying the v_max * slot_duration default.
  [[nodiscard]] double max_flight_distance() const;
  /// Reference gain as a linear power ratio.
  [[nodiscard]] double ref_gain_linear() const;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
};

void to_json(nlohmann::json& j, const Range& r);
void from_json(const nlohmann::json& j, Range& r);
void to_json(nlohmann::json& j, const WorldConfig& c);
/// Missing fields keep their defaults; unknown fields are rejected.
void from_json(const nlohmann::json& j, WorldConfig& c);

WorldConfig load_world_config(const std::string& path);

}  // namespace itdt::env
