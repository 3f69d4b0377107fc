// Command-line front end: train, eval, oracle, compare, plotdata.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "itdt/env/world.hpp"
#include "itdt/errors.hpp"
#include "itdt/harness/csv.hpp"
#include "itdt/harness/experiment.hpp"
#include "itdt/harness/oracle.hpp"

namespace fs = std::filesystem;
using namespace itdt;

namespace {

constexpr int kConfigExit = 2;
constexpr int kContractExit = 3;

std::optional<fs::path> output_root() {
  if (const char* root = std::getenv("ITDT_OUTPUT_ROOT"); root && *root) return fs::path(root);
  return std::nullopt;
}

harness::ExperimentSpec load_spec(const std::string& path, const std::optional<std::uint64_t>& seed) {
  auto spec = harness::load_experiment_spec(path, output_root());
  if (seed) spec.seeds = {*seed};
  return spec;
}

std::vector<fs::path> to_paths(const std::vector<std::string>& v) {
  return {v.begin(), v.end()};
}

// Rolls the oracle's own decisions forward for `slots` slots of one episode seed.
void run_oracle(const harness::ExperimentSpec& spec, std::size_t slots, const fs::path& out) {
  harness::CsvTable t;
  t.header = {"seed", "slot", "oracle_value", "evaluations"};
  const auto grid = harness::OracleGrid::standard(spec.world);
  for (auto seed : spec.seeds) {
    env::WorldConfig world = spec.world;
    world.slots_per_episode = std::max<std::size_t>(slots, 1);
    auto state = env::env_reset(world, seed);
    for (std::size_t k = 0; k < slots; ++k) {
      const auto best = harness::brute_force_slot_oracle(state, grid);
      t.rows.push_back({std::to_string(seed), std::to_string(k), harness::format_double(best.value),
                        std::to_string(best.evaluations)});
      (void)env::env_step(state, best.assignment, best.controls);
    }
  }
  fs::create_directories(out);
  harness::write_csv(out / "oracle.csv", t);
  std::cout << (out / "oracle.csv").string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV-assisted diffusion inference offloading: simulator, trainers, harness"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string spec_path;
  bool verbose = false;
  auto* train = app.add_subcommand("train", "train every run of an experiment spec");
  train->add_option("--spec", spec_path, "experiment spec JSON")->required();
  train->add_option("--seed", seed, "override the spec's seed list with one seed");
  train->add_flag("-v,--verbose", verbose, "print progress to stderr");

  std::string run_dir;
  auto* eval = app.add_subcommand("eval", "re-run greedy evaluation of a trained run");
  eval->add_option("--run", run_dir, "run directory")->required();

  std::size_t slots = 1;
  std::string oracle_out;
  auto* oracle = app.add_subcommand("oracle", "per-slot brute-force optimum along an oracle rollout");
  oracle->add_option("--spec", spec_path, "experiment spec JSON")->required();
  oracle->add_option("--slots", slots, "slots to solve")->required();
  oracle->add_option("--seed", seed, "override the spec's seed list with one seed");
  oracle->add_option("--out", oracle_out, "output directory (default: spec output_dir)");

  std::vector<std::string> runs;
  std::string out_dir = ".";
  auto* compare = app.add_subcommand("compare", "median/IQR comparison of evaluated runs");
  compare->add_option("--runs", runs, "run directories")->required();
  compare->add_option("--out", out_dir, "report directory");

  std::string kind;
  auto* plot = app.add_subcommand("plotdata", "export tabular plot data");
  plot->add_option("--kind", kind,
                   "learning_curve | utility_vs_sweep | fidelity_delay_bars | trajectory")
      ->required();
  plot->add_option("--runs", runs, "run directories")->required();
  plot->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigExit;
  }

  try {
    if (*train) {
      for (const auto& r : harness::run_experiment(load_spec(spec_path, seed), verbose)) {
        std::cout << r.dir << ' ' << r.config_hash << '\n';
      }
    } else if (*eval) {
      const auto s = harness::evaluate_run(run_dir);
      std::cout << "mean_reward " << harness::format_double(s.mean_reward) << '\n';
    } else if (*oracle) {
      const auto spec = load_spec(spec_path, seed);
      run_oracle(spec, slots, oracle_out.empty() ? spec.output_dir : fs::path(oracle_out));
    } else if (*compare) {
      const auto report = harness::compare_algorithms(to_paths(runs));
      harness::write_report(report, out_dir);
      for (const auto& s : report.algorithms) {
        std::cout << marl::to_string(s.algorithm) << " median " << harness::format_double(s.median)
                  << " iqr " << harness::format_double(s.iqr) << '\n';
      }
    } else if (*plot) {
      for (const auto& p :
           harness::emit_plot_data(to_paths(runs), harness::parse_plot_kind(kind), out_dir)) {
        std::cout << p.string() << '\n';
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const SizeError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const ContractError& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return kContractExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
