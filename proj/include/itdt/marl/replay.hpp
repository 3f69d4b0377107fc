#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "itdt/mdp/encoding.hpp"
#include "itdt/nn/dense.hpp"

namespace itdt::marl {

/// One joint step: every agent's observation and raw action, the shared
/// reward, and every agent's next observation. Agents are sensors first,
/// then UAVs, each in ascending id.
struct Transition {
  std::vector<mdp::Vector> observations;
  std::vector<mdp::Vector> actions;
  double reward = 0.0;
  std::vector<mdp::Vector> next_observations;
  /// Optional per-agent inputs for the critic in place of observations; empty
  /// means the critic sees the observations themselves.
  std::vector<mdp::Vector> critic_observations;
  std::vector<mdp::Vector> next_critic_observations;
};

/// Column-per-sample view of a sampled batch, split by agent.
struct Batch {
  std::vector<nn::Matrix> observations;
  std::vector<nn::Matrix> actions;
  std::vector<nn::Matrix> next_observations;
  nn::Vector rewards;
  /// Filled only when the transitions carried critic inputs.
  std::vector<nn::Matrix> critic_observations;
  std::vector<nn::Matrix> next_critic_observations;

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(rewards.size()); }
  [[nodiscard]] const std::vector<nn::Matrix>& critic_view() const {
    return critic_observations.empty() ? observations : critic_observations;
  }
  [[nodiscard]] const std::vector<nn::Matrix>& next_critic_view() const {
    return next_critic_observations.empty() ? next_observations : next_critic_observations;
  }
};

/// Bounded FIFO of transitions with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  /// Appends; at capacity the oldest transition is overwritten.
  void push(Transition t);

  /// Distinct uniformly chosen storage indices (no replacement within a call).
  /// Throws NotReadyError if fewer than batch_size transitions are stored.
  [[nodiscard]] std::vector<std::size_t> sample_indices(std::size_t batch_size,
                                                        std::mt19937_64& rng) const;
  [[nodiscard]] Batch sample(std::size_t batch_size, std::mt19937_64& rng) const;
  [[nodiscard]] Batch gather(const std::vector<std::size_t>& indices) const;

  [[nodiscard]] std::size_t size() const { return items_.size(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] std::size_t total_pushed() const { return pushed_; }
  /// i-th oldest stored transition.
  [[nodiscard]] const Transition& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  ///< slot of the oldest item once full
  std::size_t pushed_ = 0;
  std::vector<Transition> items_;
};

}  // namespace itdt::marl
