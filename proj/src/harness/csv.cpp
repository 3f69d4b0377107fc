#include "itdt/harness/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "itdt/errors.hpp"

namespace itdt::harness {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ContractError("CSV has no column '" + name + "'");
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    double v = 0.0;
    const auto& s = row.at(c);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ContractError("CSV column '" + name + "' holds non-numeric '" + s + "'");
    }
    out.push_back(v);
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContractError("cannot write " + path.string());
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
    out << '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (first) {
      t.header = std::move(fields);
      first = false;
    } else {
      t.rows.push_back(std::move(fields));
    }
  }
  return t;
}

CsvTable metrics_table(const std::vector<marl::EpisodeMetrics>& metrics) {
  CsvTable t;
  t.header = kMetricsHeader;
  for (const auto& m : metrics) {
    t.rows.push_back({std::to_string(m.episode), format_double(m.reward), format_double(m.utility),
                      format_double(m.mean_fidelity), format_double(m.mean_delay),
                      std::to_string(m.penalty_count), format_double(m.noise_std),
                      format_double(m.wall_ms)});
  }
  return t;
}

}  // namespace itdt::harness
