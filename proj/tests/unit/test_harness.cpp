#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "itdt/errors.hpp"
#include "itdt/harness/csv.hpp"
#include "itdt/harness/experiment.hpp"

using namespace itdt;
using namespace itdt::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("itdt_harness_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentSpec tiny_spec(const fs::path& out) {
  ExperimentSpec s;
  s.world.num_uavs = 1;
  s.world.num_sensors = 2;
  s.world.slots_per_episode = 4;
  s.trainer.episodes = 3;
  s.trainer.warmup = 4;
  s.trainer.batch_size = 4;
  s.trainer.actor_hidden = {4};
  s.trainer.critic_hidden = {8};
  s.trainer.buffer_capacity = 100;
  s.trainer.eval_episodes = 2;
  s.trainer.eval_tail_episodes = 1;
  s.output_dir = out;
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void set_mean_reward(const fs::path& run, double v) {
  std::ifstream in(run / "eval_summary.json");
  nlohmann::json j;
  in >> j;
  in.close();
  j["mean_reward"] = v;
  std::ofstream(run / "eval_summary.json") << j.dump();
}

}  // namespace

TEST(Csv, FormatRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 10000; ++i) {
    const double v = i % 3 ? u(rng) : u(rng) * 1e-300;
    ASSERT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(3.0), "3");
}

TEST(Csv, TableRoundTrip) {
  const auto dir = scratch("csv");
  fs::create_directories(dir);
  std::vector<marl::EpisodeMetrics> ms;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1e3);
  for (std::size_t e = 0; e < 50; ++e) {
    ms.push_back({e, g(rng), g(rng), g(rng), g(rng), e % 4, g(rng), g(rng)});
  }
  write_csv(dir / "m.csv", metrics_table(ms));
  const auto t = read_csv(dir / "m.csv");
  EXPECT_EQ(t.header, kMetricsHeader);
  ASSERT_EQ(t.rows.size(), 50u);
  const auto reward = t.numeric_column("reward");
  const auto delay = t.numeric_column("mean_delay");
  for (std::size_t e = 0; e < 50; ++e) {
    EXPECT_EQ(reward[e], ms[e].reward);
    EXPECT_EQ(delay[e], ms[e].mean_delay);
  }
  EXPECT_THROW((void)t.column("nope"), ContractError);
  fs::remove_all(dir);
}

TEST(Spec, JsonAndValidation) {
  auto s = tiny_spec("runs");
  s.algorithms = {marl::Algorithm::MATD3, marl::Algorithm::MADDPG};
  s.sweep_axis = SweepAxis::num_uavs;
  s.sweep_values = {1, 2};
  const nlohmann::json j = s;
  const auto back = j.get<ExperimentSpec>();
  EXPECT_EQ(nlohmann::json(back), j);

  auto bad = s;
  bad.seeds.clear();
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = s;
  bad.sweep_values = {-1};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = s;
  bad.sweep_values = {1.5};
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_THROW((void)nlohmann::json({{"sweep", "x"}}).get<ExperimentSpec>(), ConfigError);
  EXPECT_THROW((void)nlohmann::json({{"sweep_axis", "height"}}).get<ExperimentSpec>(), ConfigError);
}

TEST(Spec, LoadResolvesOutputRoot) {
  const auto dir = scratch("load");
  fs::create_directories(dir);
  std::ofstream(dir / "spec.json") << R"({"output_dir": "exp1", "seeds": [4, 5]})";
  const auto s = load_experiment_spec(dir / "spec.json", fs::path("/data/root"));
  EXPECT_EQ(s.output_dir, fs::path("/data/root/exp1"));
  EXPECT_EQ(s.seeds, (std::vector<std::uint64_t>{4, 5}));
  std::ofstream(dir / "bad.json") << R"({"world": {"v_min": -1}})";
  EXPECT_THROW((void)load_experiment_spec(dir / "bad.json"), ConfigError);
  EXPECT_THROW((void)load_experiment_spec(dir / "missing.json"), ConfigError);
  fs::remove_all(dir);
}

TEST(Sweep, ApplyAndHash) {
  env::WorldConfig w;
  EXPECT_EQ(apply_sweep(w, SweepAxis::num_uavs, 3).num_uavs, 3u);
  EXPECT_EQ(apply_sweep(w, SweepAxis::num_sensors, 8).num_sensors, 8u);
  EXPECT_EQ(apply_sweep(w, SweepAxis::uav_freq, 250).uav_freq, (env::Range{250, 250}));
  EXPECT_EQ(apply_sweep(w, SweepAxis::none, 9), w);

  const nlohmann::json base{{"world", w}, {"trainer", marl::TrainerConfig{}}};
  const auto h = config_hash(base);
  EXPECT_EQ(h.size(), 16u);
  EXPECT_EQ(config_hash(base), h);
  auto changed = w;
  changed.phi2 = 10.5;
  EXPECT_NE(config_hash({{"world", changed}, {"trainer", marl::TrainerConfig{}}}), h);
  marl::TrainerConfig t;
  t.seed = 1;
  EXPECT_NE(config_hash({{"world", w}, {"trainer", t}}), h);
}

TEST(Experiment, RunsArtifactsAndDeterminism) {
  const auto out = scratch("exp");
  auto spec = tiny_spec(out);
  spec.sweep_axis = SweepAxis::uav_freq;
  spec.sweep_values = {150, 300};
  spec.seeds = {0, 1, 2};
  const auto records = run_experiment(spec);
  ASSERT_EQ(records.size(), 6u);
  std::set<std::string> hashes;
  for (const auto& r : records) {
    hashes.insert(r.config_hash);
    const auto dir = out / r.dir;
    for (const char* f : {"config.json", "metrics.csv", "eval_curve.csv", "checkpoint.json",
                          "eval_summary.json", "trajectory.jsonl"}) {
      EXPECT_TRUE(fs::exists(dir / f)) << dir / f;
    }
    const auto m = read_csv(dir / "metrics.csv");
    EXPECT_EQ(m.header, kMetricsHeader);
    EXPECT_EQ(m.rows.size(), 3u);
    std::ifstream traj(dir / "trajectory.jsonl");
    std::size_t lines = 0;
    for (std::string line; std::getline(traj, line);) {
      const auto j = nlohmann::json::parse(line);
      EXPECT_TRUE(j.contains("slot") && j.contains("uav_id") && j.contains("x") && j.contains("y") &&
                  j.contains("num_assigned"));
      ++lines;
    }
    EXPECT_EQ(lines, 4u * 1u);
  }
  EXPECT_EQ(hashes.size(), 6u);
  EXPECT_TRUE(fs::exists(out / "manifest.json"));

  const auto first = slurp(out / records[0].dir / "metrics.csv");
  const auto summary = slurp(out / records[0].dir / "eval_summary.json");
  (void)run_experiment(spec);
  EXPECT_EQ(slurp(out / records[0].dir / "metrics.csv"), first);
  EXPECT_EQ(slurp(out / records[0].dir / "eval_summary.json"), summary);

  const auto s = evaluate_run(out / records[0].dir);
  EXPECT_EQ(s.episode_rewards.size(), 2u);
  EXPECT_EQ(slurp(out / records[0].dir / "eval_summary.json"), summary);
  fs::remove_all(out);
}

TEST(Experiment, CompareAndPlotData) {
  const auto out = scratch("cmp");
  auto spec = tiny_spec(out);
  spec.algorithms = {marl::Algorithm::SU_HATD3, marl::Algorithm::MADDPG};
  spec.sweep_axis = SweepAxis::num_sensors;
  spec.sweep_values = {1, 2};
  spec.seeds = {0, 1};
  const auto records = run_experiment(spec);
  ASSERT_EQ(records.size(), 8u);
  std::vector<fs::path> dirs;
  for (const auto& r : records) dirs.push_back(out / r.dir);

  for (std::size_t i = 0; i < dirs.size(); ++i) {
    set_mean_reward(dirs[i], records[i].algorithm == marl::Algorithm::SU_HATD3 ? 110.0 : 100.0);
  }
  const auto report = compare_algorithms(dirs);
  ASSERT_EQ(report.algorithms.size(), 2u);
  EXPECT_EQ(report.algorithms[0].algorithm, marl::Algorithm::SU_HATD3);
  EXPECT_EQ(report.algorithms[0].median, 110.0);
  EXPECT_EQ(report.algorithms[0].iqr, 0.0);
  ASSERT_EQ(report.gaps_percent.size(), 1u);
  EXPECT_NEAR(report.gaps_percent[0].second, 10.0, 1e-12);
  write_report(report, out / "report");
  const auto t = read_csv(out / "report" / "comparison.csv");
  EXPECT_EQ(t.numeric_column("median"), (std::vector<double>{110.0, 100.0}));

  for (const auto& d : dirs) set_mean_reward(d, 42.0);
  const auto same = compare_algorithms(dirs);
  EXPECT_EQ(same.gaps_percent[0].second, 0.0);
  EXPECT_THROW((void)compare_algorithms({dirs[0]}), ContractError);

  const auto lc = emit_plot_data(dirs, PlotKind::learning_curve, out / "plots");
  ASSERT_EQ(lc.size(), 2u);
  const auto curve = read_csv(lc[0]);
  EXPECT_EQ(curve.header, (std::vector<std::string>{"episode", "mean", "lo", "hi"}));
  EXPECT_EQ(curve.rows.size(), 3u);

  const auto us = emit_plot_data(dirs, PlotKind::utility_vs_sweep, out / "plots");
  ASSERT_EQ(us.size(), 2u);
  const auto ust = read_csv(us[0]);
  EXPECT_EQ(ust.rows.size(), 2u);
  EXPECT_EQ(ust.numeric_column("sweep_value"), (std::vector<double>{1.0, 2.0}));

  const auto bars = emit_plot_data(dirs, PlotKind::fidelity_delay_bars, out / "plots");
  ASSERT_EQ(bars.size(), 1u);
  EXPECT_EQ(read_csv(bars[0]).rows.size(), 2u);

  const auto traj = emit_plot_data(dirs, PlotKind::trajectory, out / "plots");
  EXPECT_EQ(traj.size(), 8u);

  EXPECT_THROW((void)parse_plot_kind("heatmap"), ConfigError);
  fs::remove_all(out);
}

TEST(Experiment, CompareMissingSummary) {
  const auto out = scratch("missing");
  auto spec = tiny_spec(out);
  spec.seeds = {0, 1};
  const auto records = run_experiment(spec);
  fs::remove(out / records[1].dir / "eval_summary.json");
  EXPECT_THROW((void)compare_algorithms({out / records[0].dir, out / records[1].dir}),
               ContractError);
  fs::remove_all(out);
}

TEST(Quantile, Interpolates) {
  EXPECT_EQ(quantile({3, 1, 2}, 0.5), 2.0);
  EXPECT_EQ(quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_EQ(quantile({1, 2, 3, 4, 5}, 0.25), 2.0);
  EXPECT_THROW((void)quantile({}, 0.5), ContractError);
}

TEST(Trajectory, RowsPerEpisode) {
  env::WorldConfig w;
  w.slots_per_episode = 6;
  const auto layout = mdp::ObservationLayout::from_config(w);
  marl::TrainerConfig t;
  t.actor_hidden = {4};
  t.critic_hidden = {4};
  const auto l = marl::make_learner(layout, t);
  std::vector<nn::DenseNetwork> actors;
  for (const auto& a : l.actors) actors.push_back(a.online);
  const auto rows = record_trajectory(w, 3, actors);
  EXPECT_EQ(rows.size(), 6u * w.num_uavs);
  for (const auto& r : rows) {
    EXPECT_GE(r.x, 0.0);
    EXPECT_LE(r.y, w.area_side);
  }
  const auto cd = centroid_distance_by_quarter(w, 3, actors);
  EXPECT_GE(cd.first_quarter, 0.0);
}
