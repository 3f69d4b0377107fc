#pragma once

#include <cstddef>
#include <vector>

#include "itdt/env/world.hpp"

namespace itdt::harness {

inline constexpr std::size_t kOracleMaxSensors = 5;
inline constexpr std::size_t kOracleMaxUavs = 3;

/// Discrete decision grids searched by the slot oracle.
struct OracleGrid {
  /// Pre-normalization budget shares in [0, 1]; share s maps to raw weight 2s - 1.
  std::vector<double> weight_levels;
  std::vector<double> angles;  ///< radians
  std::vector<double> speeds;  ///< m/s

  /// Shares {0, .25, .5, .75, 1}, 8 compass angles, speeds {v_min, mid, v_max}.
  [[nodiscard]] static OracleGrid standard(const env::WorldConfig& config);
  /// Inserts every midpoint (angles wrap around), so the result contains this grid.
  [[nodiscard]] OracleGrid refined() const;
};

struct OracleResult {
  /// Best utility minus penalties over the grids.
  double value = 0.0;
  env::OffloadAssignment assignment;
  std::vector<env::UavControl> controls;
  /// Grid points whose value was computed.
  std::size_t evaluations = 0;
};

/// Exhaustive search over assignments, per-task weight levels and UAV moves.
///
/// The slot value is separable across UAVs once the assignment is fixed and
/// does not depend on the move (transmission uses the slot-start position),
/// so each (UAV, served subset) pair is searched once and moves resolve to the
/// first grid point. Ties keep the earliest candidate in enumeration order:
/// assignments count up with sensor 0 most significant, DEFER before UAV 0.
/// Throws SizeError beyond kOracleMaxSensors / kOracleMaxUavs.
[[nodiscard]] OracleResult brute_force_slot_oracle(const env::WorldState& state,
                                                   const OracleGrid& grid);

}  // namespace itdt::harness
