#include "itdt/env/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "itdt/errors.hpp"

namespace itdt::env {

double WorldConfig::max_flight_distance() const {
  return L_max > 0.0 ? L_max : v_max * slot_duration;
}

double WorldConfig::ref_gain_linear() const {
  return ref_gain_is_db ? std::pow(10.0, ref_gain / 10.0) : ref_gain;
}

namespace {

void check(bool ok, const char* msg) {
  if (!ok) throw ConfigError(std::string("invalid world config: ") + msg);
}

bool finite_range(const Range& r) { return std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi; }

}  // namespace

void WorldConfig::validate() const {
  check(std::isfinite(area_side) && area_side > 0.0, "area_side must be > 0");
  check(std::isfinite(uav_altitude) && uav_altitude > 0.0, "uav_altitude must be > 0");
  check(std::isfinite(slot_duration) && slot_duration > 0.0, "slot_duration must be > 0");
  check(slots_per_episode >= 1, "slots_per_episode must be >= 1");
  check(v_min > 0.0 && v_min <= v_max, "require 0 < v_min <= v_max");
  check(max_flight_distance() >= v_max * slot_duration,
        "L_max must be >= v_max * slot_duration");
  check(tx_power >= 0.0, "tx_power must be >= 0");
  check(ref_gain_linear() >= 0.0, "ref_gain must be >= 0");
  check(noise_power > 0.0, "noise_power must be > 0");
  check(bandwidth > 0.0, "bandwidth must be > 0");
  check(finite_range(data_size_range) && data_size_range.lo >= 0.0,
        "data_size_range must satisfy 0 <= lo <= hi");
  check(steps_min >= 0.0, "steps_min must be >= 0");
  check(finite_range(steps_max) && steps_min < steps_max.lo,
        "steps_min must be < steps_max.lo <= steps_max.hi");
  check(finite_range(fidelity_max) && fidelity_max.lo >= 0.0,
        "fidelity_max must satisfy 0 <= lo <= hi");
  check(fidelity_min >= 0.0 && fidelity_min <= fidelity_max.lo,
        "require 0 <= fidelity_min <= fidelity_max.lo");
  check(uav_slot_budget > 0.0, "uav_slot_budget must be > 0");
  check(finite_range(uav_freq) && uav_freq.lo > 0.0, "uav_freq must satisfy 0 < lo <= hi");
  check(std::isfinite(phi1) && std::isfinite(phi2), "utility weights must be finite");
  check(deadline >= 0.0 && deadline < slot_duration, "require 0 <= deadline < slot_duration");
  check(lambda_D >= 0.0 && lambda_F >= 0.0, "penalty weights must be >= 0");
  check(allow_defer || num_uavs >= 1 || num_sensors == 0,
        "every task must be served but there are no UAVs");
}

void to_json(nlohmann::json& j, const Range& r) { j = nlohmann::json::array({r.lo, r.hi}); }

void from_json(const nlohmann::json& j, Range& r) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("range must be a two-element array");
  r.lo = j[0].get<double>();
  r.hi = j[1].get<double>();
}

#define ITDT_WORLD_FIELDS(X)                                                                   \
  X(num_uavs) X(num_sensors) X(area_side) X(uav_altitude) X(slot_duration)                     \
  X(slots_per_episode) X(v_min) X(v_max) X(L_max) X(tx_power) X(ref_gain) X(ref_gain_is_db)    \
  X(noise_power) X(bandwidth) X(data_size_range) X(steps_min) X(steps_max) X(fidelity_min)     \
  X(fidelity_max) X(uav_slot_budget) X(uav_freq) X(phi1) X(phi2) X(deadline) X(lambda_D)       \
  X(lambda_F) X(allow_defer)

void to_json(nlohmann::json& j, const WorldConfig& c) {
  j = nlohmann::json::object();
#define X(name) j[#name] = c.name;
  ITDT_WORLD_FIELDS(X)
#undef X
}

void from_json(const nlohmann::json& j, WorldConfig& c) {
  if (!j.is_object()) throw ConfigError("world config must be a JSON object");
  static const std::set<std::string> known = {
#define X(name) #name,
      ITDT_WORLD_FIELDS(X)
#undef X
  };
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown world config field: " + key);
  }
  try {
#define X(name) \
  if (j.contains(#name)) j.at(#name).get_to(c.name);
    ITDT_WORLD_FIELDS(X)
#undef X
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed world config: ") + e.what());
  }
}

#undef ITDT_WORLD_FIELDS

WorldConfig load_world_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open world config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  auto cfg = j.get<WorldConfig>();
  cfg.validate();
  return cfg;
}

}  // namespace itdt::env
