#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "itdt/env/world.hpp"
#include "itdt/marl/replay.hpp"
#include "itdt/mdp/encoding.hpp"
#include "itdt/nn/dense.hpp"

namespace itdt::marl {

enum class Algorithm { SU_HATD3, MATD3, MADDPG, HADDPG };

[[nodiscard]] std::string to_string(Algorithm a);
/// Accepts the canonical names ("SU_HATD3", "SU-HATD3", "MATD3", ...).
[[nodiscard]] Algorithm parse_algorithm(const std::string& name);

/// Structural properties of each algorithm.
struct AlgorithmTraits {
  bool twin_critics = false;
  bool sequential_actors = false;
  bool delayed_and_smoothed = false;
};
[[nodiscard]] AlgorithmTraits traits(Algorithm a);

struct TrainerConfig {
  Algorithm algorithm = Algorithm::SU_HATD3;
  double actor_lr = 1e-6;
  double critic_lr = 1e-3;
  double gamma = 0.99;
  double tau = 0.005;
  std::size_t batch_size = 256;
  std::size_t policy_delay = 2;
  double noise_std = 0.2;
  double noise_decay = 0.9995;
  double noise_floor = 0.02;
  bool target_smoothing = true;
  double smoothing_std = 0.1;
  double smoothing_clip = 0.2;
  std::size_t episodes = 400;
  /// Steps per episode; 0 means the world's slots_per_episode.
  std::size_t steps_per_episode = 0;
  /// Gradient steps (critic update, plus actor update every policy_delay) per pushed transition.
  std::size_t updates_per_step = 1;
  std::size_t warmup = 1000;
  std::size_t buffer_capacity = 1000000;
  std::vector<std::size_t> actor_hidden{128, 128};
  std::vector<std::size_t> critic_hidden{256, 256};
  /// Actor loss adds (c / 2) * mean squared output pre-activation; keeps tanh
  /// outputs off saturation so exploration noise can still flip decisions.
  double actor_preact_penalty = 0.0;
  /// Critic reads assignment-free UAV views in the UAV observation slots, so
  /// the offload decision reaches it only through the sensor actions.
  bool critic_uav_view = true;
  /// Rewards stored for learning are divided by this; reported metrics are not.
  double reward_scale = 1.0;
  /// MADDPG only: one centralized critic per agent instead of one shared critic.
  bool per_agent_critics = false;
  /// Greedy evaluation episodes run after each of the final K training episodes.
  std::size_t eval_tail_episodes = 0;
  std::size_t eval_episodes = 10;
  std::uint64_t eval_seed_base = 900000;
  /// Fill the wall_ms metrics column; off keeps metrics byte-reproducible.
  bool record_wall_ms = false;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
  /// policy_delay after algorithm overrides (1 for the DDPG family).
  [[nodiscard]] std::size_t effective_policy_delay() const;
  [[nodiscard]] bool effective_smoothing() const;
};

void to_json(nlohmann::json& j, const TrainerConfig& c);
void from_json(const nlohmann::json& j, TrainerConfig& c);

/// One online/target network pair with its optimizer.
struct NetworkSlot {
  nn::DenseNetwork online;
  nn::DenseNetwork target;
  nn::AdamState optimizer;
  std::uint64_t version = 0;  ///< bumped on every optimizer step
};

/// One or two critics evaluated on the same joint input.
struct CriticSet {
  std::vector<NetworkSlot> critics;
};

/// Everything that learns: per-agent actors and the centralized critics.
struct Learner {
  mdp::ObservationLayout layout;
  std::vector<NetworkSlot> actors;  ///< sensors then UAVs
  std::vector<CriticSet> critic_sets;  ///< one shared set, or one per agent
  std::uint64_t critic_updates = 0;
  std::uint64_t actor_updates = 0;
  double actor_preact_penalty = 0.0;
  /// critic_updates value at the most recent actor update.
  std::optional<std::uint64_t> critics_at_last_actor_update;

  [[nodiscard]] const CriticSet& critics_for(std::size_t agent) const;
  [[nodiscard]] CriticSet& critics_for(std::size_t agent);
};

[[nodiscard]] Learner make_learner(const mdp::ObservationLayout& layout,
                                   const TrainerConfig& config);

/// Sensor-then-UAV actions for one slot, plus the decoded environment action.
struct JointStep {
  std::vector<mdp::Vector> observations;
  std::vector<mdp::Vector> actions;
  env::OffloadAssignment assignment;
  std::vector<env::UavControl> controls;
};

using ActionFn = std::function<mdp::Vector(std::size_t agent, const mdp::Vector& obs)>;

/// Runs sensor policies, resolves the offload assignment, then builds UAV
/// observations and runs UAV policies. Actions are clipped to [-1, 1].
[[nodiscard]] JointStep act(const env::WorldState& state, const mdp::ObservationLayout& layout,
                            const ActionFn& policy);

/// mu_i(o_i) + N(0, noise_std^2), clipped. noise_std = 0 draws nothing.
[[nodiscard]] JointStep select_actions(const std::vector<NetworkSlot>& actors,
                                       const env::WorldState& state,
                                       const mdp::ObservationLayout& layout, double noise_std,
                                       std::mt19937_64& rng);

struct SmoothingConfig {
  bool enabled = false;
  double std = 0.1;
  double clip = 0.2;
};

/// Joint critic input (joint_dim x batch): observation blocks then action blocks.
[[nodiscard]] nn::Matrix joint_input(const mdp::ObservationLayout& layout,
                                     const std::vector<nn::Matrix>& observations,
                                     const std::vector<nn::Matrix>& actions);

/// y = r + gamma * min_k Q'_k(o', mu'(o') [+ clipped noise]). Always bootstraps.
[[nodiscard]] nn::Vector compute_targets(const Batch& batch, const mdp::ObservationLayout& layout,
                                         const std::vector<NetworkSlot>& actors,
                                         const CriticSet& critics, double gamma,
                                         const SmoothingConfig& smoothing, std::mt19937_64& rng);

/// One Adam step per critic on mean squared error to targets; returns the losses.
std::vector<double> critic_update(const nn::Matrix& joint, const nn::Vector& targets,
                                  CriticSet& critics);

/// Per actor update, the actor versions each agent's gradient was computed against.
struct ActorUpdateTrace {
  std::vector<std::size_t> order;
  /// seen_versions[k][j]: version of actor j when agent order[k] was updated.
  std::vector<std::vector<std::uint64_t>> seen_versions;
  /// dQ/d(own action) used for each updated agent, action_dim x batch.
  std::vector<nn::Matrix> action_gradients;
};

/// Sensors ascend Q_1 first, each seeing earlier updates; UAVs follow with
/// sensor actions recomputed by the updated sensor actors. Throws
/// ContractError if no critic update happened since the previous actor update.
ActorUpdateTrace sequential_actor_update(const Batch& batch, Learner& learner);

/// Every actor ascends Q_1 against the pre-update actions of all others.
ActorUpdateTrace simultaneous_actor_update(const Batch& batch, Learner& learner);

/// Soft-updates every target network.
void soft_update_targets(Learner& learner, double tau);

/// Per-episode training metrics row.
struct EpisodeMetrics {
  std::size_t episode = 0;
  double reward = 0.0;
  double utility = 0.0;
  double mean_fidelity = 0.0;
  double mean_delay = 0.0;
  std::size_t penalty_count = 0;
  double noise_std = 0.0;
  double wall_ms = 0.0;
};

/// Totals over one rollout; fidelity and delay are means over served tasks.
struct EpisodeStats {
  double reward = 0.0;
  double utility = 0.0;
  double mean_fidelity = 0.0;
  double mean_delay = 0.0;
  std::size_t penalty_count = 0;
  std::size_t served = 0;
};

/// Called before every env_step with the pre-step state and the chosen step.
using SlotObserver = std::function<void(const env::WorldState& state, const JointStep& step,
                                        const env::SlotOutcome& outcome)>;

/// Plays one episode with a fixed policy; no learning.
EpisodeStats run_episode(const env::WorldConfig& world, std::uint64_t env_seed,
                         const ActionFn& policy, const SlotObserver& observer = {});

[[nodiscard]] ActionFn greedy_policy(const std::vector<NetworkSlot>& actors);
[[nodiscard]] ActionFn greedy_policy(const std::vector<nn::DenseNetwork>& actors);
/// Uniform raw actions in [-1, 1]; the returned function owns its RNG.
[[nodiscard]] ActionFn uniform_random_policy(const mdp::ObservationLayout& layout,
                                             std::uint64_t seed);

struct TrainingResult {
  std::vector<EpisodeMetrics> metrics;
  /// (episode, evaluation reward) for the tail evaluation episodes.
  std::vector<std::pair<std::size_t, double>> eval_curve;
  Learner learner;
  std::size_t transitions_pushed = 0;
  std::size_t gradient_steps = 0;
};

/// Hook for progress reporting; called after every episode.
using EpisodeCallback = std::function<void(const EpisodeMetrics&)>;

[[nodiscard]] TrainingResult train(const TrainerConfig& config, const env::WorldConfig& world,
                                   const EpisodeCallback& on_episode = {});

/// Seed of training episode e (independent stream per run seed).
[[nodiscard]] std::uint64_t episode_seed(std::uint64_t run_seed, std::size_t episode);

/// Whole-learner checkpoint: all actor and critic networks (online and target).
[[nodiscard]] nlohmann::json learner_checkpoint(const Learner& learner);
[[nodiscard]] std::vector<nn::DenseNetwork> actors_from_checkpoint(const nlohmann::json& j);

}  // namespace itdt::marl
