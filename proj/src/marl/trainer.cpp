#include "itdt/marl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>

#include "itdt/errors.hpp"

namespace itdt::marl {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::SU_HATD3: return "SU_HATD3";
    case Algorithm::MATD3: return "MATD3";
    case Algorithm::MADDPG: return "MADDPG";
    case Algorithm::HADDPG: return "HADDPG";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  std::string key;
  for (char c : name) {
    if (c == '-' || c == '_') continue;
    key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (key == "SUHATD3") return Algorithm::SU_HATD3;
  if (key == "MATD3") return Algorithm::MATD3;
  if (key == "MADDPG") return Algorithm::MADDPG;
  if (key == "HADDPG") return Algorithm::HADDPG;
  throw ConfigError("unknown algorithm: " + name);
}

AlgorithmTraits traits(Algorithm a) {
  switch (a) {
    case Algorithm::SU_HATD3: return {true, true, true};
    case Algorithm::MATD3: return {true, false, true};
    case Algorithm::MADDPG: return {false, false, false};
    case Algorithm::HADDPG: return {false, true, false};
  }
  return {};
}

void TrainerConfig::validate() const {
  auto check = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(std::string("invalid trainer config: ") + msg);
  };
  check(actor_lr > 0.0 && critic_lr > 0.0, "learning rates must be > 0");
  check(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  check(tau >= 0.0 && tau <= 1.0, "tau must lie in [0, 1]");
  check(batch_size >= 1, "batch_size must be >= 1");
  check(policy_delay >= 1, "policy_delay must be >= 1");
  check(noise_floor >= 0.0 && noise_std >= noise_floor, "require noise_std >= noise_floor >= 0");
  check(noise_decay > 0.0 && noise_decay <= 1.0, "noise_decay must lie in (0, 1]");
  check(smoothing_std >= 0.0 && smoothing_clip >= 0.0, "smoothing parameters must be >= 0");
  check(buffer_capacity >= batch_size, "buffer_capacity must be >= batch_size");
  check(reward_scale > 0.0, "reward_scale must be > 0");
  check(actor_preact_penalty >= 0.0, "actor_preact_penalty must be >= 0");
  check(updates_per_step >= 1, "updates_per_step must be >= 1");
  check(eval_episodes >= 1, "eval_episodes must be >= 1");
  for (auto h : actor_hidden) check(h > 0, "actor hidden sizes must be > 0");
  for (auto h : critic_hidden) check(h > 0, "critic hidden sizes must be > 0");
}

std::size_t TrainerConfig::effective_policy_delay() const {
  return traits(algorithm).delayed_and_smoothed ? policy_delay : 1;
}

bool TrainerConfig::effective_smoothing() const {
  return traits(algorithm).delayed_and_smoothed && target_smoothing;
}

#define ITDT_TRAINER_FIELDS(X)                                                                 \
  X(actor_lr) X(critic_lr) X(gamma) X(tau) X(batch_size) X(policy_delay) X(noise_std)          \
  X(noise_decay) X(noise_floor) X(target_smoothing) X(smoothing_std) X(smoothing_clip)         \
  X(episodes) X(steps_per_episode) X(updates_per_step) X(warmup) X(buffer_capacity)           \
  X(actor_hidden) X(critic_hidden) X(actor_preact_penalty) X(critic_uav_view) X(reward_scale)  \
  X(per_agent_critics) X(eval_tail_episodes) X(eval_episodes) X(eval_seed_base)               \
  X(record_wall_ms) X(seed)

void to_json(nlohmann::json& j, const TrainerConfig& c) {
  j = nlohmann::json::object();
  j["algorithm"] = to_string(c.algorithm);
#define X(name) j[#name] = c.name;
  ITDT_TRAINER_FIELDS(X)
#undef X
}

void from_json(const nlohmann::json& j, TrainerConfig& c) {
  if (!j.is_object()) throw ConfigError("trainer config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "algorithm") {
        c.algorithm = parse_algorithm(value.get<std::string>());
        continue;
      }
#define X(name)            \
  if (key == #name) {      \
    value.get_to(c.name);  \
    continue;              \
  }
      ITDT_TRAINER_FIELDS(X)
#undef X
      throw ConfigError("unknown trainer config field: " + key);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed trainer config: ") + e.what());
  }
}

#undef ITDT_TRAINER_FIELDS

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  return splitmix(splitmix(seed) ^ (stream * 0x632be59bd9b4e019ULL));
}

NetworkSlot make_slot(std::vector<std::size_t> sizes, nn::Activation act, std::uint64_t seed,
                      double lr) {
  NetworkSlot s;
  s.online = nn::init_network(sizes, act, seed);
  s.target = s.online;
  s.optimizer = nn::AdamState::for_network(s.online, lr);
  return s;
}

double clip1(double v) { return std::clamp(v, -1.0, 1.0); }

void write_rows(nn::Matrix& joint, std::size_t offset, const nn::Matrix& block) {
  joint.middleRows(static_cast<Eigen::Index>(offset), block.rows()) = block;
}

bool all_finite(const nn::ParameterSet& p) {
  for (const auto& l : p) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

}  // namespace

std::uint64_t episode_seed(std::uint64_t run_seed, std::size_t episode) {
  return mix(run_seed, 0x1000000ULL + episode);
}

const CriticSet& Learner::critics_for(std::size_t agent) const {
  return critic_sets.size() == 1 ? critic_sets.front() : critic_sets.at(agent);
}

CriticSet& Learner::critics_for(std::size_t agent) {
  return critic_sets.size() == 1 ? critic_sets.front() : critic_sets.at(agent);
}

Learner make_learner(const mdp::ObservationLayout& layout, const TrainerConfig& config) {
  config.validate();
  Learner l;
  l.actor_preact_penalty = config.actor_preact_penalty;
  l.layout = layout;
  for (std::size_t i = 0; i < layout.num_agents(); ++i) {
    std::vector<std::size_t> sizes{layout.obs_dim(i)};
    sizes.insert(sizes.end(), config.actor_hidden.begin(), config.actor_hidden.end());
    sizes.push_back(layout.action_dim(i));
    l.actors.push_back(make_slot(sizes, nn::Activation::tanh, mix(config.seed, 100 + i),
                                 config.actor_lr));
  }
  const auto t = traits(config.algorithm);
  const std::size_t sets =
      (config.algorithm == Algorithm::MADDPG && config.per_agent_critics) ? layout.num_agents() : 1;
  std::vector<std::size_t> sizes{layout.joint_dim()};
  sizes.insert(sizes.end(), config.critic_hidden.begin(), config.critic_hidden.end());
  sizes.push_back(1);
  for (std::size_t s = 0; s < sets; ++s) {
    CriticSet set;
    for (std::size_t k = 0; k < (t.twin_critics ? 2u : 1u); ++k) {
      set.critics.push_back(make_slot(sizes, nn::Activation::identity,
                                      mix(config.seed, 50000 + 2 * s + k), config.critic_lr));
    }
    l.critic_sets.push_back(std::move(set));
  }
  return l;
}

JointStep act(const env::WorldState& state, const mdp::ObservationLayout& layout,
              const ActionFn& policy) {
  JointStep step;
  const std::size_t R = layout.num_sensors;
  const std::size_t N = layout.num_uavs;
  step.observations.reserve(R + N);
  step.actions.reserve(R + N);
  for (std::size_t r = 0; r < R; ++r) {
    step.observations.push_back(mdp::encode_sensor_obs(state, r, layout));
    auto a = policy(r, step.observations.back());
    if (a.size() != layout.sensor_action_dim()) throw ContractError("sensor policy output size");
    for (auto& v : a) v = clip1(v);
    step.actions.push_back(std::move(a));
  }
  step.assignment = mdp::decode_assignment(
      std::vector<mdp::Vector>(step.actions.begin(), step.actions.begin() + static_cast<long>(R)),
      layout);
  for (std::size_t n = 0; n < N; ++n) {
    step.observations.push_back(mdp::encode_uav_obs(state, n, step.assignment, layout));
    auto a = policy(R + n, step.observations.back());
    if (a.size() != layout.uav_action_dim()) throw ContractError("UAV policy output size");
    for (auto& v : a) v = clip1(v);
    step.controls.push_back(mdp::decode_uav_control(a, state.config));
    step.actions.push_back(std::move(a));
  }
  return step;
}

JointStep select_actions(const std::vector<NetworkSlot>& actors, const env::WorldState& state,
                         const mdp::ObservationLayout& layout, double noise_std,
                         std::mt19937_64& rng) {
  if (actors.size() != layout.num_agents()) throw ContractError("one actor per agent required");
  return act(state, layout, [&](std::size_t agent, const mdp::Vector& obs) {
    const nn::Vector out = nn::forward(
        actors[agent].online, Eigen::Map<const nn::Vector>(obs.data(), static_cast<long>(obs.size())));
    mdp::Vector a(out.data(), out.data() + out.size());
    if (noise_std > 0.0) {
      std::normal_distribution<double> noise(0.0, noise_std);
      for (auto& v : a) v += noise(rng);
    }
    return a;
  });
}

nn::Matrix joint_input(const mdp::ObservationLayout& layout,
                       const std::vector<nn::Matrix>& observations,
                       const std::vector<nn::Matrix>& actions) {
  const std::size_t agents = layout.num_agents();
  if (observations.size() != agents || actions.size() != agents) {
    throw ContractError("joint input needs one observation and action block per agent");
  }
  const Eigen::Index B = agents ? observations.front().cols() : 0;
  nn::Matrix joint(static_cast<Eigen::Index>(layout.joint_dim()), B);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < agents; ++i) {
    if (observations[i].rows() != static_cast<Eigen::Index>(layout.obs_dim(i)) ||
        observations[i].cols() != B) {
      throw ContractError("observation block " + std::to_string(i) + " has wrong shape");
    }
    write_rows(joint, offset, observations[i]);
    offset += layout.obs_dim(i);
  }
  for (std::size_t i = 0; i < agents; ++i) {
    if (actions[i].rows() != static_cast<Eigen::Index>(layout.action_dim(i)) ||
        actions[i].cols() != B) {
      throw ContractError("action block " + std::to_string(i) + " has wrong shape");
    }
    write_rows(joint, offset, actions[i]);
    offset += layout.action_dim(i);
  }
  return joint;
}

nn::Vector compute_targets(const Batch& batch, const mdp::ObservationLayout& layout,
                           const std::vector<NetworkSlot>& actors, const CriticSet& critics,
                           double gamma, const SmoothingConfig& smoothing, std::mt19937_64& rng) {
  if (batch.size() == 0) throw ContractError("compute_targets on an empty batch");
  if (critics.critics.empty()) throw ContractError("compute_targets needs at least one critic");
  std::vector<nn::Matrix> next_actions;
  next_actions.reserve(actors.size());
  for (std::size_t i = 0; i < actors.size(); ++i) {
    nn::Matrix a = nn::forward_batch(actors[i].target, batch.next_observations[i]);
    if (smoothing.enabled && smoothing.std > 0.0) {
      std::normal_distribution<double> noise(0.0, smoothing.std);
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
          a(r, c) = clip1(a(r, c) + std::clamp(noise(rng), -smoothing.clip, smoothing.clip));
        }
      }
    }
    next_actions.push_back(std::move(a));
  }
  const nn::Matrix joint = joint_input(layout, batch.next_critic_view(), next_actions);
  nn::Vector q = nn::forward_batch(critics.critics[0].target, joint).row(0).transpose();
  for (std::size_t k = 1; k < critics.critics.size(); ++k) {
    q = q.cwiseMin(nn::forward_batch(critics.critics[k].target, joint).row(0).transpose());
  }
  return batch.rewards + gamma * q;
}

std::vector<double> critic_update(const nn::Matrix& joint, const nn::Vector& targets,
                                  CriticSet& critics) {
  if (joint.cols() != targets.size()) throw ContractError("critic_update: batch size mismatch");
  const double B = static_cast<double>(targets.size());
  std::vector<double> losses;
  for (auto& slot : critics.critics) {
    nn::ForwardCache cache;
    const nn::Matrix q = nn::forward_batch(slot.online, joint, &cache);
    const nn::Matrix diff = q - targets.transpose();
    const double loss = diff.squaredNorm() / B;
    if (!std::isfinite(loss)) {
      throw NumericError("critic loss became non-finite (version " +
                         std::to_string(slot.version) + ")");
    }
    const auto g = nn::backward(slot.online, cache, (2.0 / B) * diff);
    nn::adam_step(slot.online, g.params, slot.optimizer);
    ++slot.version;
    losses.push_back(loss);
  }
  return losses;
}

namespace {

void check_phase(const Learner& learner) {
  if (learner.critic_updates == 0 ||
      (learner.critics_at_last_actor_update &&
       *learner.critics_at_last_actor_update >= learner.critic_updates)) {
    throw ContractError("actor update requested without a fresh critic update");
  }
}

// Ascent step for one actor given dQ/da (action_dim x B) on its cached forward.
void ascend(NetworkSlot& actor, const nn::ForwardCache& cache, const nn::Matrix& dq_da,
            double preact_penalty) {
  const auto g = preact_penalty > 0.0
                     ? nn::backward(actor.online, cache, -dq_da,
                                    (preact_penalty / static_cast<double>(dq_da.cols())) *
                                        nn::output_preactivation(actor.online, cache))
                     : nn::backward(actor.online, cache, -dq_da);
  if (!all_finite(g.params)) throw NumericError("actor gradient became non-finite");
  nn::adam_step(actor.online, g.params, actor.optimizer);
  ++actor.version;
}

nn::Matrix critic_action_gradient(const nn::DenseNetwork& critic, const nn::Matrix& joint,
                                  std::size_t offset, std::size_t dim) {
  nn::ForwardCache cache;
  (void)nn::forward_batch(critic, joint, &cache);
  const double B = static_cast<double>(joint.cols());
  const auto g = nn::backward(critic, cache, nn::Matrix::Constant(1, joint.cols(), 1.0 / B),
                              /*want_param_grads=*/false);
  return g.input.middleRows(static_cast<Eigen::Index>(offset), static_cast<Eigen::Index>(dim));
}

void finish_actor_phase(Learner& learner) {
  ++learner.actor_updates;
  learner.critics_at_last_actor_update = learner.critic_updates;
}

}  // namespace

ActorUpdateTrace sequential_actor_update(const Batch& batch, Learner& learner) {
  check_phase(learner);
  const auto& layout = learner.layout;
  const std::size_t agents = layout.num_agents();

  std::vector<nn::Matrix> actions(agents);
  std::vector<std::uint64_t> in_joint(agents);
  for (std::size_t i = 0; i < agents; ++i) {
    actions[i] = nn::forward_batch(learner.actors[i].online, batch.observations[i]);
    in_joint[i] = learner.actors[i].version;
  }
  nn::Matrix joint = joint_input(layout, batch.critic_view(), actions);

  ActorUpdateTrace trace;
  // Sensors are agents [0, R), UAVs follow: ascending id order is the phase order.
  for (std::size_t i = 0; i < agents; ++i) {
    auto& actor = learner.actors[i];
    const std::size_t offset = mdp::action_offset(layout, i);
    nn::ForwardCache cache;
    write_rows(joint, offset, nn::forward_batch(actor.online, batch.observations[i], &cache));
    in_joint[i] = actor.version;

    nn::Matrix dq = critic_action_gradient(learner.critics_for(i).critics[0].online, joint, offset,
                                           layout.action_dim(i));
    trace.order.push_back(i);
    trace.seen_versions.push_back(in_joint);
    ascend(actor, cache, dq, learner.actor_preact_penalty);
    trace.action_gradients.push_back(std::move(dq));

    // Later agents see this agent's post-update action.
    write_rows(joint, offset, nn::forward_batch(actor.online, batch.observations[i]));
    in_joint[i] = actor.version;
  }
  finish_actor_phase(learner);
  return trace;
}

ActorUpdateTrace simultaneous_actor_update(const Batch& batch, Learner& learner) {
  check_phase(learner);
  const auto& layout = learner.layout;
  const std::size_t agents = layout.num_agents();

  std::vector<nn::Matrix> actions(agents);
  std::vector<nn::ForwardCache> caches(agents);
  std::vector<std::uint64_t> in_joint(agents);
  for (std::size_t i = 0; i < agents; ++i) {
    actions[i] = nn::forward_batch(learner.actors[i].online, batch.observations[i], &caches[i]);
    in_joint[i] = learner.actors[i].version;
  }
  const nn::Matrix joint = joint_input(layout, batch.critic_view(), actions);

  ActorUpdateTrace trace;
  std::vector<nn::Matrix> grads(agents);
  if (learner.critic_sets.size() == 1) {
    const nn::Matrix all = critic_action_gradient(learner.critic_sets[0].critics[0].online, joint,
                                                  0, layout.joint_dim());
    for (std::size_t i = 0; i < agents; ++i) {
      grads[i] = all.middleRows(static_cast<Eigen::Index>(mdp::action_offset(layout, i)),
                                static_cast<Eigen::Index>(layout.action_dim(i)));
    }
  } else {
    for (std::size_t i = 0; i < agents; ++i) {
      grads[i] = critic_action_gradient(learner.critics_for(i).critics[0].online, joint,
                                        mdp::action_offset(layout, i), layout.action_dim(i));
    }
  }
  for (std::size_t i = 0; i < agents; ++i) {
    trace.order.push_back(i);
    trace.seen_versions.push_back(in_joint);
    ascend(learner.actors[i], caches[i], grads[i], learner.actor_preact_penalty);
    trace.action_gradients.push_back(std::move(grads[i]));
  }
  finish_actor_phase(learner);
  return trace;
}

void soft_update_targets(Learner& learner, double tau) {
  for (auto& a : learner.actors) nn::soft_update(a.target, a.online, tau);
  for (auto& set : learner.critic_sets) {
    for (auto& c : set.critics) nn::soft_update(c.target, c.online, tau);
  }
}

ActionFn greedy_policy(const std::vector<NetworkSlot>& actors) {
  std::vector<nn::DenseNetwork> nets;
  for (const auto& a : actors) nets.push_back(a.online);
  return greedy_policy(nets);
}

ActionFn greedy_policy(const std::vector<nn::DenseNetwork>& actors) {
  auto nets = std::make_shared<const std::vector<nn::DenseNetwork>>(actors);
  return [nets](std::size_t agent, const mdp::Vector& obs) {
    const nn::Vector out = nn::forward(
        nets->at(agent), Eigen::Map<const nn::Vector>(obs.data(), static_cast<long>(obs.size())));
    return mdp::Vector(out.data(), out.data() + out.size());
  };
}

ActionFn uniform_random_policy(const mdp::ObservationLayout& layout, std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [rng, layout](std::size_t agent, const mdp::Vector&) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    mdp::Vector a(layout.action_dim(agent));
    for (auto& v : a) v = u(*rng);
    return a;
  };
}

namespace {

struct StatsAccumulator {
  EpisodeStats stats;
  double fidelity_sum = 0.0;
  double delay_sum = 0.0;

  void add(const env::SlotOutcome& o) {
    stats.reward += mdp::compute_reward(o);
    stats.utility += o.utility;
    stats.penalty_count += o.penalty_count();
    for (const auto& t : o.tasks) {
      if (!t.uav) continue;
      ++stats.served;
      fidelity_sum += t.fidelity;
      delay_sum += t.delay;
    }
  }

  EpisodeStats finish() {
    if (stats.served) {
      stats.mean_fidelity = fidelity_sum / static_cast<double>(stats.served);
      stats.mean_delay = delay_sum / static_cast<double>(stats.served);
    }
    return stats;
  }
};

}  // namespace

EpisodeStats run_episode(const env::WorldConfig& world, std::uint64_t env_seed,
                         const ActionFn& policy, const SlotObserver& observer) {
  auto state = env::env_reset(world, env_seed);
  const auto layout = mdp::ObservationLayout::from_config(world);
  StatsAccumulator acc;
  while (!state.episode_done()) {
    const JointStep step = act(state, layout, policy);
    if (observer) {
      const env::WorldState before = state;
      const auto outcome = env::env_step(state, step.assignment, step.controls);
      observer(before, step, outcome);
      acc.add(outcome);
    } else {
      acc.add(env::env_step(state, step.assignment, step.controls));
    }
  }
  return acc.finish();
}

TrainingResult train(const TrainerConfig& config, const env::WorldConfig& world_in,
                     const EpisodeCallback& on_episode) {
  config.validate();
  env::WorldConfig world = world_in;
  if (config.steps_per_episode > 0) world.slots_per_episode = config.steps_per_episode;
  world.validate();
  const auto layout = mdp::ObservationLayout::from_config(world);

  TrainingResult result{{}, {}, make_learner(layout, config), 0, 0};
  Learner& learner = result.learner;
  ReplayBuffer buffer(config.buffer_capacity);
  std::mt19937_64 rng(mix(config.seed, 7));
  const auto t = traits(config.algorithm);
  const std::size_t delay = config.effective_policy_delay();
  const SmoothingConfig smoothing{config.effective_smoothing(), config.smoothing_std,
                                  config.smoothing_clip};
  double noise = config.noise_std;
  std::size_t env_steps = 0;

  auto choose = [&](const env::WorldState& state) {
    if (env_steps < config.warmup) {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      return act(state, layout, [&](std::size_t agent, const mdp::Vector&) {
        mdp::Vector a(layout.action_dim(agent));
        for (auto& v : a) v = u(rng);
        return a;
      });
    }
    return select_actions(learner.actors, state, layout, noise, rng);
  };

  auto learn = [&] {
    if (buffer.total_pushed() < config.warmup || buffer.size() < config.batch_size) return;
    const Batch batch = buffer.sample(config.batch_size, rng);
    const nn::Matrix joint = joint_input(layout, batch.critic_view(), batch.actions);
    for (auto& set : learner.critic_sets) {
      const nn::Vector y =
          compute_targets(batch, layout, learner.actors, set, config.gamma, smoothing, rng);
      (void)critic_update(joint, y, set);
    }
    ++learner.critic_updates;
    ++result.gradient_steps;
    if (learner.critic_updates % delay == 0) {
      if (t.sequential_actors) {
        (void)sequential_actor_update(batch, learner);
      } else {
        (void)simultaneous_actor_update(batch, learner);
      }
      soft_update_targets(learner, config.tau);
    }
  };

  auto push = [&](Transition tr) {
    buffer.push(std::move(tr));
    ++result.transitions_pushed;
    for (std::size_t k = 0; k < config.updates_per_step; ++k) learn();
  };

  for (std::size_t episode = 0; episode < config.episodes; ++episode) {
    const auto started = std::chrono::steady_clock::now();
    auto state = env::env_reset(world, episode_seed(config.seed, episode));
    StatsAccumulator acc;

    // Sensor observations followed by assignment-free UAV views.
    auto critic_inputs = [&](const JointStep& s) {
      std::vector<mdp::Vector> v(s.observations.begin(),
                                 s.observations.begin() + static_cast<std::ptrdiff_t>(layout.num_sensors));
      for (std::size_t n = 0; n < layout.num_uavs; ++n) {
        v.push_back(mdp::encode_uav_critic_view(state, n, layout));
      }
      return v;
    };

    JointStep step = choose(state);
    while (true) {
      std::vector<mdp::Vector> critic_obs;
      if (config.critic_uav_view) critic_obs = critic_inputs(step);
      const auto outcome = env::env_step(state, step.assignment, step.controls);
      acc.add(outcome);
      ++env_steps;
      if (env_steps > config.warmup) noise = std::max(config.noise_floor, noise * config.noise_decay);

      Transition tr;
      tr.observations = std::move(step.observations);
      tr.actions = std::move(step.actions);
      tr.reward = mdp::compute_reward(outcome, config.reward_scale);

      // The next UAV observations depend on the next offload decisions, so
      // they are read off the next joint step (also at the time limit).
      step = choose(state);
      tr.next_observations = step.observations;
      if (config.critic_uav_view) {
        tr.critic_observations = std::move(critic_obs);
        tr.next_critic_observations = critic_inputs(step);
      }
      push(std::move(tr));
      if (state.episode_done()) break;
    }

    const auto stats = acc.finish();
    EpisodeMetrics m;
    m.episode = episode;
    m.reward = stats.reward;
    m.utility = stats.utility;
    m.mean_fidelity = stats.mean_fidelity;
    m.mean_delay = stats.mean_delay;
    m.penalty_count = stats.penalty_count;
    m.noise_std = noise;
    if (config.record_wall_ms) {
      m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            started)
                      .count();
    }
    result.metrics.push_back(m);

    if (episode + config.eval_tail_episodes >= config.episodes) {
      const auto eval_seed = config.eval_seed_base + episode % config.eval_episodes;
      const auto ev = run_episode(world, eval_seed, greedy_policy(learner.actors));
      result.eval_curve.emplace_back(episode, ev.reward);
    }
    if (on_episode) on_episode(m);
  }
  return result;
}

nlohmann::json learner_checkpoint(const Learner& learner) {
  nlohmann::json j;
  j["format"] = "itdt-learner";
  j["version"] = nn::kCheckpointVersion;
  j["num_sensors"] = learner.layout.num_sensors;
  j["num_uavs"] = learner.layout.num_uavs;
  j["allow_defer"] = learner.layout.allow_defer;
  auto pair = [](const NetworkSlot& s) {
    return nlohmann::json{{"online", nn::to_checkpoint(s.online)},
                          {"target", nn::to_checkpoint(s.target)},
                          {"version", s.version}};
  };
  j["actors"] = nlohmann::json::array();
  for (const auto& a : learner.actors) j["actors"].push_back(pair(a));
  j["critic_sets"] = nlohmann::json::array();
  for (const auto& set : learner.critic_sets) {
    auto arr = nlohmann::json::array();
    for (const auto& c : set.critics) arr.push_back(pair(c));
    j["critic_sets"].push_back(std::move(arr));
  }
  return j;
}

std::vector<nn::DenseNetwork> actors_from_checkpoint(const nlohmann::json& j) {
  try {
    if (j.at("format") != "itdt-learner") throw ConfigError("not a learner checkpoint");
    if (j.at("version").get<int>() != nn::kCheckpointVersion) {
      throw ConfigError("unsupported learner checkpoint version");
    }
    std::vector<nn::DenseNetwork> out;
    for (const auto& a : j.at("actors")) out.push_back(nn::from_checkpoint(a.at("online")));
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed learner checkpoint: ") + e.what());
  }
}

}  // namespace itdt::marl
