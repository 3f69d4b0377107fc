#include "itdt/marl/replay.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "itdt/errors.hpp"

namespace itdt::marl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be >= 1");
}

void ReplayBuffer::push(Transition t) {
  if (!std::isfinite(t.reward)) throw NumericError("non-finite reward pushed to replay buffer");
  if (t.critic_observations.size() != t.next_critic_observations.size() ||
      (!t.critic_observations.empty() && t.critic_observations.size() != t.observations.size())) {
    throw ContractError("replay: critic inputs must cover every agent for both steps");
  }
  ++pushed_;
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw ContractError("replay index out of range");
  return items_[(head_ + i) % items_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch_size,
                                                      std::mt19937_64& rng) const {
  if (batch_size == 0) throw ContractError("batch size must be >= 1");
  if (items_.size() < batch_size) {
    throw NotReadyError("replay buffer holds " + std::to_string(items_.size()) +
                        " transitions, batch needs " + std::to_string(batch_size));
  }
  // Floyd's algorithm: uniform subset without replacement in O(batch) draws.
  const std::size_t n = items_.size();
  std::unordered_set<std::size_t> chosen;
  std::vector<std::size_t> out;
  out.reserve(batch_size);
  for (std::size_t j = n - batch_size; j < n; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    const std::size_t pick = chosen.insert(t).second ? t : j;
    if (pick == j) chosen.insert(j);
    out.push_back(pick);
  }
  return out;
}

Batch ReplayBuffer::gather(const std::vector<std::size_t>& indices) const {
  Batch b;
  if (indices.empty()) return b;
  const Transition& first = items_.at(indices.front());
  const std::size_t agents = first.observations.size();
  const auto B = static_cast<Eigen::Index>(indices.size());
  auto alloc = [&](std::vector<nn::Matrix>& dst, const std::vector<mdp::Vector>& proto) {
    dst.resize(agents);
    for (std::size_t i = 0; i < agents; ++i) {
      dst[i].resize(static_cast<Eigen::Index>(proto[i].size()), B);
    }
  };
  alloc(b.observations, first.observations);
  alloc(b.actions, first.actions);
  alloc(b.next_observations, first.next_observations);
  const bool views = !first.critic_observations.empty();
  if (views) {
    alloc(b.critic_observations, first.critic_observations);
    alloc(b.next_critic_observations, first.next_critic_observations);
  }
  auto put = [](nn::Matrix& dst, const mdp::Vector& v, Eigen::Index col) {
    if (static_cast<Eigen::Index>(v.size()) != dst.rows()) {
      throw ContractError("replay: transitions disagree on vector sizes");
    }
    dst.col(col) = Eigen::Map<const nn::Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  };
  b.rewards.resize(B);
  for (Eigen::Index col = 0; col < B; ++col) {
    const Transition& t = items_.at(indices[static_cast<std::size_t>(col)]);
    for (std::size_t i = 0; i < agents; ++i) {
      put(b.observations[i], t.observations[i], col);
      put(b.actions[i], t.actions[i], col);
      put(b.next_observations[i], t.next_observations[i], col);
      if (views) {
        put(b.critic_observations[i], t.critic_observations.at(i), col);
        put(b.next_critic_observations[i], t.next_critic_observations.at(i), col);
      }
    }
    b.rewards(col) = t.reward;
  }
  return b;
}

Batch ReplayBuffer::sample(std::size_t batch_size, std::mt19937_64& rng) const {
  return gather(sample_indices(batch_size, rng));
}

}  // namespace itdt::marl
