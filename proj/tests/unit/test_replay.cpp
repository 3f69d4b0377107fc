#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "itdt/errors.hpp"
#include "itdt/marl/replay.hpp"

using namespace itdt;
using namespace itdt::marl;

namespace {

Transition tagged(double tag) {
  return {{{tag, tag + 1}, {tag}}, {{-tag}, {tag, 0.5, 0.25}}, tag, {{tag + 2, tag + 3}, {tag + 4}}};
}

}  // namespace

TEST(Replay, FifoEviction) {
  ReplayBuffer b(3);
  for (int i = 0; i < 4; ++i) b.push(tagged(i));
  EXPECT_EQ(b.size(), 3u);
  EXPECT_EQ(b.total_pushed(), 4u);
  EXPECT_EQ(b.at(0).reward, 1.0);
  EXPECT_EQ(b.at(2).reward, 3.0);
  for (int i = 4; i < 11; ++i) b.push(tagged(i));
  EXPECT_EQ(b.at(0).reward, 8.0);
  EXPECT_EQ(b.at(1).reward, 9.0);
  EXPECT_EQ(b.at(2).reward, 10.0);
  EXPECT_THROW((void)b.at(3), ContractError);
}

TEST(Replay, Errors) {
  EXPECT_THROW(ReplayBuffer(0), ConfigError);
  ReplayBuffer b(5);
  std::mt19937_64 rng(0);
  b.push(tagged(1));
  EXPECT_THROW((void)b.sample(2, rng), NotReadyError);
  EXPECT_THROW((void)b.sample(0, rng), ContractError);
  EXPECT_THROW(b.push(tagged(std::numeric_limits<double>::quiet_NaN())), NumericError);
  EXPECT_EQ(b.size(), 1u);
}

TEST(Replay, FullBatchIsPermutation) {
  ReplayBuffer b(20);
  for (int i = 0; i < 20; ++i) b.push(tagged(i));
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    auto idx = b.sample_indices(20, rng);
    std::sort(idx.begin(), idx.end());
    std::vector<std::size_t> all(20);
    std::iota(all.begin(), all.end(), 0u);
    ASSERT_EQ(idx, all);
  }
}

TEST(Replay, NoDuplicatesWithinBatch) {
  ReplayBuffer b(100);
  for (int i = 0; i < 100; ++i) b.push(tagged(i));
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 200; ++rep) {
    auto idx = b.sample_indices(37, rng);
    std::sort(idx.begin(), idx.end());
    ASSERT_EQ(std::adjacent_find(idx.begin(), idx.end()), idx.end());
  }
}

TEST(Replay, UniformChiSquare) {
  ReplayBuffer b(10);
  for (int i = 0; i < 10; ++i) b.push(tagged(i));
  std::mt19937_64 rng(5);
  std::vector<double> count(10, 0.0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) count[b.sample_indices(1, rng)[0]] += 1.0;
  double chi2 = 0.0;
  for (double c : count) chi2 += (c - draws / 10.0) * (c - draws / 10.0) / (draws / 10.0);
  // 9 degrees of freedom, 0.999 quantile.
  EXPECT_LT(chi2, 27.88);

  // Batches of 3: each element is included with probability 3/10.
  std::fill(count.begin(), count.end(), 0.0);
  const int batches = 40000;
  for (int i = 0; i < batches; ++i) {
    for (auto k : b.sample_indices(3, rng)) count[k] += 1.0;
  }
  chi2 = 0.0;
  const double e = batches * 0.3;
  for (double c : count) chi2 += (c - e) * (c - e) / e;
  EXPECT_LT(chi2, 27.88);
}

TEST(Replay, GatherLayout) {
  ReplayBuffer b(4);
  for (int i = 0; i < 4; ++i) b.push(tagged(10 * i));
  const auto batch = b.gather({2, 0});
  ASSERT_EQ(batch.size(), 2u);
  ASSERT_EQ(batch.observations.size(), 2u);
  EXPECT_EQ(batch.observations[0].rows(), 2);
  EXPECT_EQ(batch.observations[0](0, 0), 20.0);
  EXPECT_EQ(batch.observations[0](1, 1), 1.0);
  EXPECT_EQ(batch.actions[1].rows(), 3);
  EXPECT_EQ(batch.actions[1](0, 0), 20.0);
  EXPECT_EQ(batch.next_observations[1](0, 1), 4.0);
  EXPECT_EQ(batch.rewards(0), 20.0);
  EXPECT_EQ(batch.rewards(1), 0.0);
}

TEST(Replay, SampleDeterministicPerSeed) {
  ReplayBuffer b(50);
  for (int i = 0; i < 50; ++i) b.push(tagged(i));
  std::mt19937_64 r1(9), r2(9);
  EXPECT_EQ(b.sample_indices(16, r1), b.sample_indices(16, r2));
}

TEST(Replay, CriticViewsGathered) {
  ReplayBuffer b(4);
  for (int i = 0; i < 3; ++i) {
    auto t = tagged(i);
    t.critic_observations = {{-1.0 * i, 0.0}, {7.0}};
    t.next_critic_observations = {{-2.0 * i, 0.0}, {8.0}};
    b.push(std::move(t));
  }
  const auto batch = b.gather({2, 1});
  ASSERT_EQ(batch.critic_observations.size(), 2u);
  EXPECT_EQ(batch.critic_view()[0](0, 0), -2.0);
  EXPECT_EQ(batch.next_critic_view()[0](0, 1), -2.0);
  EXPECT_EQ(batch.critic_view()[1](0, 1), 7.0);
  EXPECT_EQ(batch.observations[0](0, 0), 2.0);

  const auto plain = [] {
    ReplayBuffer p(2);
    p.push(tagged(5));
    return p.gather({0});
  }();
  EXPECT_TRUE(plain.critic_observations.empty());
  EXPECT_EQ(&plain.critic_view(), &plain.observations);

  auto bad = tagged(1);
  bad.critic_observations = {{1.0, 2.0}, {3.0}};
  EXPECT_THROW(b.push(bad), ContractError);
}
