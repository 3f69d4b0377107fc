#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "itdt/env/config.hpp"
#include "itdt/marl/trainer.hpp"

namespace itdt::harness {

enum class SweepAxis { none, num_uavs, num_sensors, uav_freq };

[[nodiscard]] std::string to_string(SweepAxis axis);
[[nodiscard]] SweepAxis parse_sweep_axis(const std::string& name);

struct ExperimentSpec {
  env::WorldConfig world;
  marl::TrainerConfig trainer;
  /// Algorithms to train at every (sweep value, seed); empty means trainer.algorithm.
  std::vector<marl::Algorithm> algorithms;
  SweepAxis sweep_axis = SweepAxis::none;
  std::vector<double> sweep_values;
  std::vector<std::uint64_t> seeds{0};
  std::filesystem::path output_dir = "runs";

  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentSpec& s);
void from_json(const nlohmann::json& j, ExperimentSpec& s);

/// Reads a spec file; a relative output_dir resolves against output_root when given.
[[nodiscard]] ExperimentSpec load_experiment_spec(
    const std::filesystem::path& path, const std::optional<std::filesystem::path>& output_root = {});

/// World config with the sweep value applied.
[[nodiscard]] env::WorldConfig apply_sweep(const env::WorldConfig& world, SweepAxis axis,
                                           double value);

/// FNV-1a 64 over the canonical JSON dump, as 16 hex digits.
[[nodiscard]] std::string config_hash(const nlohmann::json& config);

struct RunRecord {
  std::string dir;  ///< relative to the experiment output_dir
  marl::Algorithm algorithm = marl::Algorithm::SU_HATD3;
  SweepAxis sweep_axis = SweepAxis::none;
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  std::string config_hash;
};

/// Trains, checkpoints and evaluates every (algorithm, sweep value, seed) run
/// and writes manifest.json. Each run directory holds config.json,
/// metrics.csv, eval_curve.csv, checkpoint.json, eval_summary.json and
/// trajectory.jsonl.
std::vector<RunRecord> run_experiment(const ExperimentSpec& spec, bool verbose = false);

/// Greedy evaluation summary of one run.
struct EvalSummary {
  std::vector<double> episode_rewards;
  double mean_reward = 0.0;
  double mean_utility = 0.0;
  double mean_fidelity = 0.0;
  double mean_delay = 0.0;
  double mean_penalty_count = 0.0;
};

/// Re-runs the fixed greedy protocol from a run directory's config and
/// checkpoint, rewriting eval_summary.json and trajectory.jsonl.
EvalSummary evaluate_run(const std::filesystem::path& run_dir);

/// Trajectory row of one UAV at the start of a slot.
struct TrajectoryRow {
  std::size_t slot = 0;
  std::size_t uav_id = 0;
  double x = 0.0;
  double y = 0.0;
  std::size_t num_assigned = 0;
};

/// Greedy rollout of one evaluation episode recorded per UAV and slot.
[[nodiscard]] std::vector<TrajectoryRow> record_trajectory(
    const env::WorldConfig& world, std::uint64_t env_seed,
    const std::vector<nn::DenseNetwork>& actors);

/// Per-slot state observer output used by the trajectory-tendency check:
/// mean horizontal distance of each UAV to the centroid of its assigned
/// sensors, over slots [begin, end) where it serves at least one sensor.
struct CentroidDistance {
  double first_quarter = 0.0;
  double last_quarter = 0.0;
  std::size_t first_samples = 0;
  std::size_t last_samples = 0;
};
[[nodiscard]] CentroidDistance centroid_distance_by_quarter(
    const env::WorldConfig& world, std::uint64_t env_seed,
    const std::vector<nn::DenseNetwork>& actors);

struct AlgorithmStats {
  marl::Algorithm algorithm;
  std::size_t runs = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
};

struct ComparisonReport {
  std::vector<AlgorithmStats> algorithms;  ///< best median first
  /// (best vs other) relative gap in percent, (best - other) / |other| * 100.
  std::vector<std::pair<marl::Algorithm, double>> gaps_percent;
};

/// Median/IQR of final evaluation reward per algorithm across runs. Throws
/// ContractError for fewer than two runs or missing summaries.
[[nodiscard]] ComparisonReport compare_algorithms(const std::vector<std::filesystem::path>& runs);
void write_report(const ComparisonReport& report, const std::filesystem::path& out_dir);

enum class PlotKind { learning_curve, utility_vs_sweep, fidelity_delay_bars, trajectory };
[[nodiscard]] PlotKind parse_plot_kind(const std::string& name);
[[nodiscard]] std::string to_string(PlotKind kind);

/// Writes plotting-tool-agnostic files into out_dir; returns the files written.
std::vector<std::filesystem::path> emit_plot_data(const std::vector<std::filesystem::path>& runs,
                                                  PlotKind kind,
                                                  const std::filesystem::path& out_dir);

/// Linear-interpolation quantile (q in [0, 1]) of an unsorted sample.
[[nodiscard]] double quantile(std::vector<double> values, double q);

}  // namespace itdt::harness
