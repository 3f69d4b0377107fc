#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "itdt/env/formulas.hpp"
#include "itdt/env/world.hpp"
#include "itdt/errors.hpp"
#include "itdt/harness/experiment.hpp"
#include "itdt/harness/oracle.hpp"
#include "itdt/marl/trainer.hpp"
#include "itdt/mdp/encoding.hpp"

namespace py = pybind11;
using namespace itdt;

namespace {

// Configs cross the boundary as JSON text; the Python side wraps them in dicts.
env::WorldConfig world_from(const std::string& text) {
  try {
    return nlohmann::json::parse(text.empty() ? "{}" : text).get<env::WorldConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("world config: ") + e.what());
  }
}

marl::TrainerConfig trainer_from(const std::string& text) {
  try {
    return nlohmann::json::parse(text.empty() ? "{}" : text).get<marl::TrainerConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("trainer config: ") + e.what());
  }
}

py::dict task_dict(const env::TaskOutcome& t) {
  py::dict d;
  d["uav"] = t.uav;
  d["steps"] = t.steps;
  d["fidelity"] = t.fidelity;
  d["trans_delay"] = t.trans_delay;
  d["infer_delay"] = t.infer_delay;
  d["delay"] = t.delay;
  d["penalty"] = t.penalty;
  return d;
}

py::dict outcome_dict(const env::SlotOutcome& o) {
  py::list tasks;
  for (const auto& t : o.tasks) tasks.append(task_dict(t));
  py::dict d;
  d["tasks"] = tasks;
  d["utility"] = o.utility;
  d["reward"] = mdp::compute_reward(o);
  d["penalty_count"] = o.penalty_count();
  return d;
}

std::vector<env::UavControl> controls_from(
    const std::vector<std::tuple<double, double, std::vector<double>>>& raw) {
  std::vector<env::UavControl> out;
  out.reserve(raw.size());
  for (const auto& [angle, speed, w] : raw) out.push_back({angle, speed, w});
  return out;
}

/// Stateful environment handle for interactive use.
class Env {
 public:
  Env(const std::string& world_json, std::uint64_t seed)
      : config_(world_from(world_json)), state_(env::env_reset(config_, seed)) {}

  void reset(std::uint64_t seed) { state_ = env::env_reset(config_, seed); }

  py::dict step(const std::vector<std::optional<std::size_t>>& assignment,
                const std::vector<std::tuple<double, double, std::vector<double>>>& controls) {
    return outcome_dict(env::env_step(state_, {assignment}, controls_from(controls)));
  }

  py::dict oracle() const {
    const auto r = harness::brute_force_slot_oracle(state_, harness::OracleGrid::standard(config_));
    py::list controls;
    for (const auto& c : r.controls) controls.append(py::make_tuple(c.angle, c.speed, c.raw_weights));
    py::dict d;
    d["value"] = r.value;
    d["assignment"] = r.assignment.target;
    d["controls"] = controls;
    return d;
  }

  std::vector<double> sensor_obs(std::size_t r) const {
    return mdp::encode_sensor_obs(state_, r, mdp::ObservationLayout::from_config(config_));
  }

  std::vector<double> uav_obs(std::size_t n,
                              const std::vector<std::optional<std::size_t>>& assignment) const {
    return mdp::encode_uav_obs(state_, n, {assignment}, mdp::ObservationLayout::from_config(config_));
  }

  std::size_t slot() const { return state_.slot; }
  bool done() const { return state_.episode_done(); }

  std::vector<std::pair<double, double>> uav_positions() const {
    std::vector<std::pair<double, double>> out;
    for (const auto& u : state_.uavs) out.emplace_back(u.position.x, u.position.y);
    return out;
  }

  std::vector<std::pair<double, double>> sensor_positions() const {
    std::vector<std::pair<double, double>> out;
    for (const auto& s : state_.sensors) out.emplace_back(s.position.x, s.position.y);
    return out;
  }

 private:
  env::WorldConfig config_;
  env::WorldState state_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the itdt simulator and trainers";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ContractError>(m, "ContractError", base.ptr());
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<NotReadyError>(m, "NotReadyError", base.ptr());
  py::register_exception<SizeError>(m, "SizeError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  m.def("channel_gain", &env::channel_gain, py::arg("h0"), py::arg("distance"));
  m.def("transmission_rate", &env::transmission_rate, py::arg("tx_power"), py::arg("gain"),
        py::arg("noise_sq"), py::arg("bandwidth"));
  m.def("transmission_delay", &env::transmission_delay, py::arg("assigned"), py::arg("data_bits"),
        py::arg("rate"));
  m.def("inference_delay", &env::inference_delay, py::arg("steps"), py::arg("freq"));
  m.def("fidelity_gain", &env::fidelity_gain, py::arg("steps"), py::arg("s_min"), py::arg("s_max"),
        py::arg("f_max"));
  m.def(
      "normalize_steps",
      [](const std::vector<double>& w, double budget, const std::vector<double>& caps) {
        return env::normalize_steps(w, budget, caps);
      },
      py::arg("raw_weights"), py::arg("budget"), py::arg("caps"));
  m.def("violation_penalty", &env::violation_penalty, py::arg("delay"), py::arg("deadline"),
        py::arg("fidelity"), py::arg("fidelity_floor"), py::arg("lambda_D"), py::arg("lambda_F"));
  m.def(
      "slot_utility",
      [](const std::vector<double>& f, const std::vector<double>& d, double p1, double p2) {
        return env::slot_utility(f, d, p1, p2);
      },
      py::arg("fidelities"), py::arg("delays"), py::arg("phi1"), py::arg("phi2"));

  m.def(
      "default_world_json", [] { return nlohmann::json(env::WorldConfig{}).dump(); },
      "Default world configuration as JSON text.");
  m.def(
      "default_trainer_json", [] { return nlohmann::json(marl::TrainerConfig{}).dump(); },
      "Default trainer configuration as JSON text.");

  py::class_<Env>(m, "Env")
      .def(py::init<const std::string&, std::uint64_t>(), py::arg("world_json") = "",
           py::arg("seed") = 0)
      .def("reset", &Env::reset, py::arg("seed"))
      .def("step", &Env::step, py::arg("assignment"), py::arg("controls"),
           "Advance one slot. controls holds (angle, speed, raw_weights) per UAV.")
      .def("oracle", &Env::oracle, "Per-slot brute-force optimum on the standard grid.")
      .def("sensor_obs", &Env::sensor_obs, py::arg("sensor"))
      .def("uav_obs", &Env::uav_obs, py::arg("uav"), py::arg("assignment"))
      .def_property_readonly("slot", &Env::slot)
      .def_property_readonly("done", &Env::done)
      .def_property_readonly("uav_positions", &Env::uav_positions)
      .def_property_readonly("sensor_positions", &Env::sensor_positions);

  m.def(
      "train",
      [](const std::string& trainer_json, const std::string& world_json) {
        const auto tc = trainer_from(trainer_json);
        const auto wc = world_from(world_json);
        marl::TrainingResult r;
        {
          py::gil_scoped_release release;
          r = marl::train(tc, wc);
        }
        py::list rows;
        for (const auto& e : r.metrics) {
          py::dict d;
          d["episode"] = e.episode;
          d["reward"] = e.reward;
          d["utility"] = e.utility;
          d["mean_fidelity"] = e.mean_fidelity;
          d["mean_delay"] = e.mean_delay;
          d["penalty_count"] = e.penalty_count;
          d["noise_std"] = e.noise_std;
          rows.append(d);
        }
        py::dict out;
        out["metrics"] = rows;
        out["eval_curve"] = r.eval_curve;
        out["gradient_steps"] = r.gradient_steps;
        out["checkpoint"] = marl::learner_checkpoint(r.learner).dump();
        return out;
      },
      py::arg("trainer_json") = "", py::arg("world_json") = "",
      "Train one learner; returns metrics rows and a checkpoint as JSON text.");

  m.def(
      "run_experiment",
      [](const std::filesystem::path& spec_path,
         const std::optional<std::filesystem::path>& output_root) {
        const auto spec = harness::load_experiment_spec(spec_path, output_root);
        std::vector<harness::RunRecord> runs;
        {
          py::gil_scoped_release release;
          runs = harness::run_experiment(spec);
        }
        std::vector<std::filesystem::path> dirs;
        for (const auto& r : runs) dirs.push_back(spec.output_dir / r.dir);
        return dirs;
      },
      py::arg("spec_path"), py::arg("output_root") = std::nullopt,
      "Run an experiment spec; returns the run directories.");

  m.def(
      "evaluate_run",
      [](const std::filesystem::path& run) {
        const auto s = harness::evaluate_run(run);
        py::dict d;
        d["episode_rewards"] = s.episode_rewards;
        d["mean_reward"] = s.mean_reward;
        d["mean_utility"] = s.mean_utility;
        d["mean_fidelity"] = s.mean_fidelity;
        d["mean_delay"] = s.mean_delay;
        d["mean_penalty_count"] = s.mean_penalty_count;
        return d;
      },
      py::arg("run_dir"));
}
