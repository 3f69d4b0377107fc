#include "itdt/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>

#include "itdt/errors.hpp"
#include "itdt/harness/csv.hpp"

namespace fs = std::filesystem;

namespace itdt::harness {

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::none: return "none";
    case SweepAxis::num_uavs: return "num_uavs";
    case SweepAxis::num_sensors: return "num_sensors";
    case SweepAxis::uav_freq: return "uav_freq";
  }
  return "?";
}

SweepAxis parse_sweep_axis(const std::string& name) {
  for (auto a : {SweepAxis::none, SweepAxis::num_uavs, SweepAxis::num_sensors, SweepAxis::uav_freq}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown sweep axis: " + name);
}

void ExperimentSpec::validate() const {
  world.validate();
  trainer.validate();
  if (seeds.empty()) throw ConfigError("experiment needs at least one seed");
  if (sweep_axis != SweepAxis::none && sweep_values.empty()) {
    throw ConfigError("sweep axis " + to_string(sweep_axis) + " has no values");
  }
  for (double v : sweep_values) {
    if (!(v > 0.0)) throw ConfigError("sweep values must be positive");
    if (sweep_axis == SweepAxis::num_uavs || sweep_axis == SweepAxis::num_sensors) {
      if (v != std::floor(v)) throw ConfigError("count sweeps need integral values");
    }
  }
  for (double v : sweep_values) apply_sweep(world, sweep_axis, v).validate();
}

void to_json(nlohmann::json& j, const ExperimentSpec& s) {
  j = nlohmann::json::object();
  j["world"] = s.world;
  j["trainer"] = s.trainer;
  auto algs = nlohmann::json::array();
  for (auto a : s.algorithms) algs.push_back(marl::to_string(a));
  j["algorithms"] = algs;
  j["sweep_axis"] = to_string(s.sweep_axis);
  j["sweep_values"] = s.sweep_values;
  j["seeds"] = s.seeds;
  j["output_dir"] = s.output_dir.string();
}

void from_json(const nlohmann::json& j, ExperimentSpec& s) {
  if (!j.is_object()) throw ConfigError("experiment spec must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "world") {
        value.get_to(s.world);
      } else if (key == "trainer") {
        value.get_to(s.trainer);
      } else if (key == "algorithms") {
        s.algorithms.clear();
        for (const auto& a : value) s.algorithms.push_back(marl::parse_algorithm(a.get<std::string>()));
      } else if (key == "sweep_axis") {
        s.sweep_axis = parse_sweep_axis(value.get<std::string>());
      } else if (key == "sweep_values") {
        value.get_to(s.sweep_values);
      } else if (key == "seeds") {
        value.get_to(s.seeds);
      } else if (key == "output_dir") {
        s.output_dir = value.get<std::string>();
      } else {
        throw ConfigError("unknown experiment spec field: " + key);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed experiment spec: ") + e.what());
  }
}

namespace {

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot read " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ContractError("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContractError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

ExperimentSpec load_experiment_spec(const fs::path& path, const std::optional<fs::path>& output_root) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open experiment spec " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  auto spec = j.get<ExperimentSpec>();
  if (output_root && spec.output_dir.is_relative()) spec.output_dir = *output_root / spec.output_dir;
  spec.validate();
  return spec;
}

env::WorldConfig apply_sweep(const env::WorldConfig& world, SweepAxis axis, double value) {
  env::WorldConfig w = world;
  switch (axis) {
    case SweepAxis::none: break;
    case SweepAxis::num_uavs: w.num_uavs = static_cast<std::size_t>(value); break;
    case SweepAxis::num_sensors: w.num_sensors = static_cast<std::size_t>(value); break;
    case SweepAxis::uav_freq: w.uav_freq = {value, value}; break;
  }
  return w;
}

std::string config_hash(const nlohmann::json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string run_name(marl::Algorithm alg, SweepAxis axis, double value, std::uint64_t seed) {
  std::string name = marl::to_string(alg);
  if (axis != SweepAxis::none) name += "_" + to_string(axis) + "-" + format_double(value);
  return name + "_seed" + std::to_string(seed);
}

struct RunConfig {
  env::WorldConfig world;
  marl::TrainerConfig trainer;
  SweepAxis axis = SweepAxis::none;
  double sweep_value = 0.0;
};

nlohmann::json run_config_json(const RunConfig& rc) {
  return {{"world", rc.world},
          {"trainer", rc.trainer},
          {"sweep_axis", to_string(rc.axis)},
          {"sweep_value", rc.sweep_value}};
}

RunConfig read_run_config(const fs::path& dir) {
  const auto j = read_json(dir / "config.json");
  RunConfig rc;
  try {
    j.at("world").get_to(rc.world);
    j.at("trainer").get_to(rc.trainer);
    rc.axis = parse_sweep_axis(j.at("sweep_axis").get<std::string>());
    rc.sweep_value = j.at("sweep_value").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ContractError("bad run config in " + dir.string() + ": " + e.what());
  }
  return rc;
}

void write_trajectory(const fs::path& path, const std::vector<TrajectoryRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContractError("cannot write " + path.string());
  for (const auto& r : rows) {
    nlohmann::json j{{"slot", r.slot}, {"uav_id", r.uav_id}, {"x", r.x}, {"y", r.y},
                     {"num_assigned", r.num_assigned}};
    out << j.dump() << '\n';
  }
}

}  // namespace

std::vector<TrajectoryRow> record_trajectory(const env::WorldConfig& world, std::uint64_t env_seed,
                                             const std::vector<nn::DenseNetwork>& actors) {
  std::vector<TrajectoryRow> rows;
  marl::run_episode(world, env_seed, marl::greedy_policy(actors),
                    [&](const env::WorldState& s, const marl::JointStep& step, const env::SlotOutcome&) {
                      for (const auto& uav : s.uavs) {
                        rows.push_back({s.slot, uav.id, uav.position.x, uav.position.y,
                                        step.assignment.sensors_of(uav.id).size()});
                      }
                    });
  return rows;
}

CentroidDistance centroid_distance_by_quarter(const env::WorldConfig& world, std::uint64_t env_seed,
                                              const std::vector<nn::DenseNetwork>& actors) {
  const std::size_t T = world.slots_per_episode;
  const std::size_t quarter = std::max<std::size_t>(1, T / 4);
  CentroidDistance out;
  double first = 0.0;
  double last = 0.0;
  marl::run_episode(
      world, env_seed, marl::greedy_policy(actors),
      [&](const env::WorldState& s, const marl::JointStep& step, const env::SlotOutcome&) {
        const bool in_first = s.slot < quarter;
        const bool in_last = s.slot >= T - quarter;
        if (!in_first && !in_last) return;
        for (const auto& uav : s.uavs) {
          const auto served = step.assignment.sensors_of(uav.id);
          if (served.empty()) continue;
          double cx = 0.0;
          double cy = 0.0;
          for (auto r : served) {
            cx += s.sensors[r].position.x;
            cy += s.sensors[r].position.y;
          }
          cx /= static_cast<double>(served.size());
          cy /= static_cast<double>(served.size());
          const double d = std::hypot(uav.position.x - cx, uav.position.y - cy);
          if (in_first) {
            first += d;
            ++out.first_samples;
          }
          if (in_last) {
            last += d;
            ++out.last_samples;
          }
        }
      });
  if (out.first_samples) out.first_quarter = first / static_cast<double>(out.first_samples);
  if (out.last_samples) out.last_quarter = last / static_cast<double>(out.last_samples);
  return out;
}

EvalSummary evaluate_run(const fs::path& run_dir) {
  const RunConfig rc = read_run_config(run_dir);
  const auto actors = marl::actors_from_checkpoint(read_json(run_dir / "checkpoint.json"));
  const auto policy = marl::greedy_policy(actors);

  EvalSummary s;
  double utility = 0.0;
  double fidelity = 0.0;
  double delay = 0.0;
  double penalties = 0.0;
  const std::size_t episodes = rc.trainer.eval_episodes;
  for (std::size_t k = 0; k < episodes; ++k) {
    const auto stats = marl::run_episode(rc.world, rc.trainer.eval_seed_base + k, policy);
    s.episode_rewards.push_back(stats.reward);
    s.mean_reward += stats.reward;
    utility += stats.utility;
    fidelity += stats.mean_fidelity;
    delay += stats.mean_delay;
    penalties += static_cast<double>(stats.penalty_count);
  }
  const double n = static_cast<double>(episodes);
  s.mean_reward /= n;
  s.mean_utility = utility / n;
  s.mean_fidelity = fidelity / n;
  s.mean_delay = delay / n;
  s.mean_penalty_count = penalties / n;

  nlohmann::json j{{"algorithm", marl::to_string(rc.trainer.algorithm)},
                   {"seed", rc.trainer.seed},
                   {"sweep_axis", to_string(rc.axis)},
                   {"sweep_value", rc.sweep_value},
                   {"episodes", episodes},
                   {"eval_seed_base", rc.trainer.eval_seed_base},
                   {"episode_rewards", s.episode_rewards},
                   {"mean_reward", s.mean_reward},
                   {"mean_utility", s.mean_utility},
                   {"mean_fidelity", s.mean_fidelity},
                   {"mean_delay", s.mean_delay},
                   {"mean_penalty_count", s.mean_penalty_count}};
  write_json(run_dir / "eval_summary.json", j);
  write_trajectory(run_dir / "trajectory.jsonl",
                   record_trajectory(rc.world, rc.trainer.eval_seed_base, actors));
  return s;
}

std::vector<RunRecord> run_experiment(const ExperimentSpec& spec, bool verbose) {
  spec.validate();
  std::error_code ec;
  fs::create_directories(spec.output_dir, ec);
  if (ec || !fs::is_directory(spec.output_dir)) {
    throw ContractError("cannot create output directory " + spec.output_dir.string());
  }
  const auto algorithms =
      spec.algorithms.empty() ? std::vector<marl::Algorithm>{spec.trainer.algorithm} : spec.algorithms;
  const auto values = spec.sweep_axis == SweepAxis::none ? std::vector<double>{0.0} : spec.sweep_values;

  std::vector<RunRecord> records;
  for (auto alg : algorithms) {
    for (double value : values) {
      for (auto seed : spec.seeds) {
        RunConfig rc;
        rc.world = apply_sweep(spec.world, spec.sweep_axis, value);
        rc.trainer = spec.trainer;
        rc.trainer.algorithm = alg;
        rc.trainer.seed = seed;
        if (rc.trainer.steps_per_episode > 0) rc.world.slots_per_episode = rc.trainer.steps_per_episode;
        rc.axis = spec.sweep_axis;
        rc.sweep_value = value;

        RunRecord rec;
        rec.dir = run_name(alg, spec.sweep_axis, value, seed);
        rec.algorithm = alg;
        rec.sweep_axis = spec.sweep_axis;
        rec.sweep_value = value;
        rec.seed = seed;
        const auto cfg = run_config_json(rc);
        rec.config_hash = config_hash(cfg);

        const fs::path dir = spec.output_dir / rec.dir;
        fs::create_directories(dir, ec);
        if (ec) throw ContractError("cannot create run directory " + dir.string());
        write_json(dir / "config.json", cfg);

        if (verbose) std::cerr << "training " << rec.dir << '\n';
        const auto result = marl::train(rc.trainer, rc.world);
        write_csv(dir / "metrics.csv", metrics_table(result.metrics));
        CsvTable curve;
        curve.header = {"episode", "eval_reward"};
        for (const auto& [ep, r] : result.eval_curve) {
          curve.rows.push_back({std::to_string(ep), format_double(r)});
        }
        write_csv(dir / "eval_curve.csv", curve);
        write_json(dir / "checkpoint.json", marl::learner_checkpoint(result.learner));
        (void)evaluate_run(dir);
        records.push_back(rec);
      }
    }
  }

  nlohmann::json manifest{{"spec", spec}, {"runs", nlohmann::json::array()}};
  for (const auto& r : records) {
    manifest["runs"].push_back({{"dir", r.dir},
                                {"algorithm", marl::to_string(r.algorithm)},
                                {"sweep_axis", to_string(r.sweep_axis)},
                                {"sweep_value", r.sweep_value},
                                {"seed", r.seed},
                                {"config_hash", r.config_hash}});
  }
  write_json(spec.output_dir / "manifest.json", manifest);
  return records;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ContractError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

struct RunInfo {
  fs::path dir;
  RunConfig config;
  nlohmann::json summary;
};

RunInfo load_run(const fs::path& dir) {
  RunInfo info;
  info.dir = dir;
  info.config = read_run_config(dir);
  if (!fs::exists(dir / "eval_summary.json")) {
    throw ContractError("run " + dir.string() + " has no eval_summary.json");
  }
  info.summary = read_json(dir / "eval_summary.json");
  return info;
}

std::map<marl::Algorithm, std::vector<RunInfo>> group_by_algorithm(const std::vector<fs::path>& runs) {
  std::map<marl::Algorithm, std::vector<RunInfo>> groups;
  for (const auto& dir : runs) {
    auto info = load_run(dir);
    groups[info.config.trainer.algorithm].push_back(std::move(info));
  }
  return groups;
}

}  // namespace

ComparisonReport compare_algorithms(const std::vector<fs::path>& runs) {
  if (runs.size() < 2) throw ContractError("compare needs at least two runs");
  ComparisonReport report;
  for (const auto& [alg, infos] : group_by_algorithm(runs)) {
    std::vector<double> rewards;
    for (const auto& i : infos) rewards.push_back(i.summary.at("mean_reward").get<double>());
    AlgorithmStats s{alg, infos.size(), quantile(rewards, 0.5), quantile(rewards, 0.25),
                     quantile(rewards, 0.75), 0.0};
    s.iqr = s.q3 - s.q1;
    report.algorithms.push_back(s);
  }
  std::stable_sort(report.algorithms.begin(), report.algorithms.end(),
                   [](const auto& a, const auto& b) { return a.median > b.median; });
  const double best = report.algorithms.front().median;
  for (std::size_t k = 1; k < report.algorithms.size(); ++k) {
    const double other = report.algorithms[k].median;
    double gap = 0.0;
    if (other != 0.0) {
      gap = (best - other) / std::abs(other) * 100.0;
    } else if (best != 0.0) {
      gap = std::numeric_limits<double>::infinity();
    }
    report.gaps_percent.emplace_back(report.algorithms[k].algorithm, gap);
  }
  return report;
}

void write_report(const ComparisonReport& report, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  nlohmann::json j{{"ordering", nlohmann::json::array()}, {"algorithms", nlohmann::json::array()}};
  CsvTable t;
  t.header = {"algorithm", "runs", "median", "q1", "q3", "iqr", "gap_percent"};
  for (std::size_t k = 0; k < report.algorithms.size(); ++k) {
    const auto& s = report.algorithms[k];
    const double gap = k == 0 ? 0.0 : report.gaps_percent[k - 1].second;
    j["ordering"].push_back(marl::to_string(s.algorithm));
    j["algorithms"].push_back({{"algorithm", marl::to_string(s.algorithm)},
                               {"runs", s.runs},
                               {"median", s.median},
                               {"q1", s.q1},
                               {"q3", s.q3},
                               {"iqr", s.iqr},
                               {"gap_percent", std::isfinite(gap) ? nlohmann::json(gap) : nlohmann::json(nullptr)}});
    t.rows.push_back({marl::to_string(s.algorithm), std::to_string(s.runs), format_double(s.median),
                      format_double(s.q1), format_double(s.q3), format_double(s.iqr),
                      format_double(gap)});
  }
  write_json(out_dir / "comparison.json", j);
  write_csv(out_dir / "comparison.csv", t);
}

PlotKind parse_plot_kind(const std::string& name) {
  for (auto k : {PlotKind::learning_curve, PlotKind::utility_vs_sweep, PlotKind::fidelity_delay_bars,
                 PlotKind::trajectory}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown plot kind: " + name);
}

std::string to_string(PlotKind kind) {
  switch (kind) {
    case PlotKind::learning_curve: return "learning_curve";
    case PlotKind::utility_vs_sweep: return "utility_vs_sweep";
    case PlotKind::fidelity_delay_bars: return "fidelity_delay_bars";
    case PlotKind::trajectory: return "trajectory";
  }
  return "?";
}

std::vector<fs::path> emit_plot_data(const std::vector<fs::path>& runs, PlotKind kind,
                                     const fs::path& out_dir) {
  if (runs.empty()) throw ContractError("plotdata needs at least one run");
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  const auto groups = group_by_algorithm(runs);

  switch (kind) {
    case PlotKind::learning_curve:
      for (const auto& [alg, infos] : groups) {
        std::vector<std::vector<double>> curves;
        std::size_t len = std::numeric_limits<std::size_t>::max();
        for (const auto& i : infos) {
          curves.push_back(read_csv(i.dir / "metrics.csv").numeric_column("reward"));
          len = std::min(len, curves.back().size());
        }
        CsvTable t;
        t.header = {"episode", "mean", "lo", "hi"};
        for (std::size_t e = 0; e < len; ++e) {
          double sum = 0.0;
          double lo = std::numeric_limits<double>::infinity();
          double hi = -lo;
          for (const auto& c : curves) {
            sum += c[e];
            lo = std::min(lo, c[e]);
            hi = std::max(hi, c[e]);
          }
          t.rows.push_back({std::to_string(e), format_double(sum / static_cast<double>(curves.size())),
                            format_double(lo), format_double(hi)});
        }
        const auto path = out_dir / ("learning_curve_" + marl::to_string(alg) + ".csv");
        write_csv(path, t);
        written.push_back(path);
      }
      break;
    case PlotKind::utility_vs_sweep:
      for (const auto& [alg, infos] : groups) {
        std::map<double, std::vector<double>> by_value;
        for (const auto& i : infos) {
          by_value[i.config.sweep_value].push_back(i.summary.at("mean_utility").get<double>());
        }
        CsvTable t;
        t.header = {"sweep_value", "median", "lo", "hi"};
        for (const auto& [v, us] : by_value) {
          t.rows.push_back({format_double(v), format_double(quantile(us, 0.5)),
                            format_double(*std::min_element(us.begin(), us.end())),
                            format_double(*std::max_element(us.begin(), us.end()))});
        }
        const auto path = out_dir / ("utility_vs_sweep_" + marl::to_string(alg) + ".csv");
        write_csv(path, t);
        written.push_back(path);
      }
      break;
    case PlotKind::fidelity_delay_bars: {
      CsvTable t;
      t.header = {"algorithm", "mean_fidelity", "mean_delay"};
      for (const auto& [alg, infos] : groups) {
        double f = 0.0;
        double d = 0.0;
        for (const auto& i : infos) {
          f += i.summary.at("mean_fidelity").get<double>();
          d += i.summary.at("mean_delay").get<double>();
        }
        const double n = static_cast<double>(infos.size());
        t.rows.push_back({marl::to_string(alg), format_double(f / n), format_double(d / n)});
      }
      const auto path = out_dir / "fidelity_delay_bars.csv";
      write_csv(path, t);
      written.push_back(path);
      break;
    }
    case PlotKind::trajectory:
      for (const auto& [alg, infos] : groups) {
        for (const auto& i : infos) {
          const auto src = i.dir / "trajectory.jsonl";
          if (!fs::exists(src)) throw ContractError("run " + i.dir.string() + " has no trajectory");
          const auto path = out_dir / ("trajectory_" + i.dir.filename().string() + ".jsonl");
          fs::copy_file(src, path, fs::copy_options::overwrite_existing);
          written.push_back(path);
        }
      }
      break;
  }
  return written;
}

}  // namespace itdt::harness
