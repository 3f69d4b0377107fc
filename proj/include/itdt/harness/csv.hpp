#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "itdt/marl/trainer.hpp"

namespace itdt::harness {

/// Shortest decimal text that parses back to exactly v.
[[nodiscard]] std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws ContractError when absent.
  [[nodiscard]] std::size_t column(const std::string& name) const;
  [[nodiscard]] std::vector<double> numeric_column(const std::string& name) const;
};

/// Plain comma-separated values, no quoting (all emitted fields are numeric or identifiers).
void write_csv(const std::filesystem::path& path, const CsvTable& table);
[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);

inline const std::vector<std::string> kMetricsHeader{
    "episode", "reward", "utility", "mean_fidelity", "mean_delay", "penalty_count", "noise_std",
    "wall_ms"};

[[nodiscard]] CsvTable metrics_table(const std::vector<marl::EpisodeMetrics>& metrics);

}  // namespace itdt::harness
