#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "itdt/env/formulas.hpp"
#include "itdt/errors.hpp"

using namespace itdt;
using namespace itdt::env;

TEST(ChannelGain, InverseSquare) {
  EXPECT_DOUBLE_EQ(channel_gain(1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(channel_gain(1.0, 10.0), 0.01);
  EXPECT_DOUBLE_EQ(channel_gain(2.0, 50.0), 8.0e-4);
}

TEST(ChannelGain, RejectsNonPositiveDistance) {
  EXPECT_THROW((void)channel_gain(1.0, 0.0), InvalidInput);
  EXPECT_THROW((void)channel_gain(1.0, -3.0), InvalidInput);
}

TEST(TransmissionRate, ShannonExamples) {
  // P * g^2 / noise chosen so the SNR term is exactly 1, 3 and 1e5.
  EXPECT_DOUBLE_EQ(transmission_rate(1.0, 1.0, 1.0, 1e6), 1.0e6);
  EXPECT_DOUBLE_EQ(transmission_rate(3.0, 1.0, 1.0, 1e6), 2.0e6);
  EXPECT_NEAR(transmission_rate(1e5, 1.0, 1.0, 1e6), 16609654.901315086, 16609654.9 * 1e-14);
}

TEST(TransmissionRate, RejectsNonPositiveNoise) {
  EXPECT_THROW((void)transmission_rate(1.0, 1.0, 0.0, 1e6), InvalidInput);
}

TEST(TransmissionRate, DecreasesWithDistance) {
  double prev = INFINITY;
  for (double d = 50.0; d < 2000.0; d += 7.3) {
    const double r = transmission_rate(0.1, channel_gain(1.0, d), 1e-13, 1e6);
    EXPECT_LT(r, prev);
    prev = r;
  }
}

TEST(TransmissionDelay, Examples) {
  EXPECT_DOUBLE_EQ(transmission_delay(true, 192000.0, 1e6), 0.192);
  EXPECT_EQ(transmission_delay(false, 192000.0, 1e6), 0.0);
  EXPECT_EQ(transmission_delay(false, 192000.0, 0.0), 0.0);
  EXPECT_NEAR(transmission_delay(true, 192000.0, 16609654.901315086), 0.011559541793056652,
              1e-15);
  EXPECT_THROW((void)transmission_delay(true, 1.0, 0.0), InvalidInput);
}

TEST(InferenceDelay, Examples) {
  EXPECT_DOUBLE_EQ(inference_delay(400.0, 100.0), 4.0);
  EXPECT_EQ(inference_delay(0.0, 100.0), 0.0);
  EXPECT_DOUBLE_EQ(inference_delay(600.0, 400.0), 1.5);
  EXPECT_THROW((void)inference_delay(1.0, 0.0), InvalidInput);
}

TEST(FidelityGain, Examples) {
  EXPECT_DOUBLE_EQ(fidelity_gain(200.0, 0.0, 400.0, 100.0), 50.0);
  EXPECT_EQ(fidelity_gain(0.0, 0.0, 400.0, 100.0), 0.0);
  EXPECT_EQ(fidelity_gain(500.0, 0.0, 400.0, 100.0), 100.0);
  EXPECT_EQ(fidelity_gain(50.0, 100.0, 400.0, 100.0), 0.0);
  EXPECT_THROW((void)fidelity_gain(1.0, 400.0, 400.0, 100.0), ConfigError);
}

TEST(FidelityGain, ClampedAndMonotoneOverManySamples) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> smin(0.0, 300.0), width(1.0, 500.0), fmax(1.0, 200.0),
      frac(-0.5, 1.5);
  for (int i = 0; i < 100000; ++i) {
    const double a = smin(rng), b = a + width(rng), f = fmax(rng);
    const double s1 = a + frac(rng) * (b - a), s2 = a + frac(rng) * (b - a);
    const double g1 = fidelity_gain(s1, a, b, f), g2 = fidelity_gain(s2, a, b, f);
    ASSERT_GE(g1, 0.0);
    ASSERT_LE(g1, f);
    if (s1 <= s2) {
      ASSERT_LE(g1, g2);
    } else {
      ASSERT_GE(g1, g2);
    }
  }
}

TEST(NormalizeSteps, Examples) {
  const std::vector<double> w1{1.0, 1.0}, c1{600.0, 600.0};
  EXPECT_EQ(normalize_steps(w1, 800.0, c1), (std::vector<double>{400.0, 400.0}));

  const std::vector<double> w2{0.0, 0.0, 0.0}, c2{600.0, 600.0, 600.0};
  const auto a2 = normalize_steps(w2, 900.0, c2);
  for (double a : a2) EXPECT_NEAR(a, 300.0, 1e-12);

  const std::vector<double> w3{1.0, -1.0};
  const auto s = split_steps(w3, 800.0, c1);
  EXPECT_NEAR(s.unclamped[0], 799.9992000015999968, 1e-10);
  EXPECT_NEAR(s.unclamped[1], 0.00079999840000319999, 1e-15);
  EXPECT_EQ(s.allocated[0], 600.0);
  EXPECT_NEAR(s.allocated[1], 0.00079999840000319999, 1e-15);
}

TEST(NormalizeSteps, EmptyAndMismatch) {
  EXPECT_TRUE(normalize_steps({}, 800.0, {}).empty());
  const std::vector<double> w{0.0}, c{1.0, 2.0};
  EXPECT_THROW((void)normalize_steps(w, 800.0, c), ContractError);
}

TEST(NormalizeSteps, PreClampSumsToBudget) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5), b(1.0, 5000.0);
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> w(1 + i % 6), caps(w.size(), 1e9);
    for (auto& x : w) x = u(rng);
    const double budget = b(rng);
    const auto s = split_steps(w, budget, caps);
    double sum = 0.0;
    for (double a : s.unclamped) {
      ASSERT_GE(a, 0.0);
      sum += a;
    }
    ASSERT_NEAR(sum, budget, budget * 1e-9);
    for (double a : s.allocated) ASSERT_GE(a, 0.0);
  }
}

TEST(AdvanceUav, Examples) {
  WorldConfig c;
  c.slot_duration = 1.0;
  const auto p1 = advance_uav({0, 0}, 0.0, 100.0, c);
  EXPECT_DOUBLE_EQ(p1.x, 100.0);
  EXPECT_DOUBLE_EQ(p1.y, 0.0);
  const auto p2 = advance_uav({0, 0}, std::numbers::pi / 2, 100.0, c);
  EXPECT_NEAR(p2.x, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(p2.y, 100.0);
  const auto p3 = advance_uav({950, 0}, 0.0, 100.0, c);
  EXPECT_EQ(p3, (Vec2{1000.0, 0.0}));
}

TEST(AdvanceUav, SpeedIsClamped) {
  WorldConfig c;
  c.slot_duration = 1.0;
  EXPECT_DOUBLE_EQ(advance_uav({500, 500}, 0.0, 1.0, c).x, 500.0 + c.v_min);
  EXPECT_DOUBLE_EQ(advance_uav({500, 500}, 0.0, 1e4, c).x, 500.0 + c.v_max);
}

TEST(ViolationPenalty, Examples) {
  EXPECT_NEAR(violation_penalty(1.2, 1.0, 30.0, 0.0, 1.0, 1.0), 0.2, 1e-12);
  EXPECT_EQ(violation_penalty(0.5, 1.0, 30.0, 0.0, 1.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(violation_penalty(0.5, 1.0, 10.0, 25.0, 1.0, 2.0), 30.0);
}

TEST(SlotUtility, Examples) {
  const std::vector<double> f1{50.0}, d1{0.2};
  EXPECT_DOUBLE_EQ(slot_utility(f1, d1, 1.0, 1.0), 49.8);
  EXPECT_EQ(slot_utility({}, {}, 1.0, 10.0), 0.0);
  const std::vector<double> f2{50.0, 100.0}, d2{0.5, 1.0};
  EXPECT_DOUBLE_EQ(slot_utility(f2, d2, 1.0, 10.0), 135.0);
  EXPECT_THROW((void)slot_utility(f2, d1, 1.0, 1.0), InvalidInput);
}
