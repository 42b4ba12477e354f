#include "repauc/core_model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace repauc;

// Expected rates evaluated independently (Python math.log2) and frozen here.
constexpr double kRate15dB = 905005.3812030934;
constexpr double kRate5dB = 370327.1775492231;

TEST(shannon_rate, zero_sinr_limit_is_zero) {
  EXPECT_NEAR(shannon_rate(180000, -300), 0.0, 1e-12);
}

TEST(shannon_rate, matches_frozen_values) {
  EXPECT_NEAR(shannon_rate(180000, 15), kRate15dB, 1e-6);
  EXPECT_NEAR(shannon_rate(180000, 5), kRate5dB, 1e-6);
  // rounded figures quoted for the same inputs
  EXPECT_NEAR(shannon_rate(180000, 15), 904997.0, 904997.0 * 1e-4);
  EXPECT_NEAR(shannon_rate(180000, 5), 370000.0, 370000.0 * 1e-3);
}

TEST(shannon_rate, rejects_bad_inputs) {
  EXPECT_THROW(shannon_rate(0, 10), ModelError);
  EXPECT_THROW(shannon_rate(-1, 10), ModelError);
  EXPECT_THROW(shannon_rate(180000, std::numeric_limits<double>::quiet_NaN()), ModelError);
  EXPECT_THROW(shannon_rate(std::numeric_limits<double>::infinity(), 1), ModelError);
}

TEST(shannon_rate, increasing_in_sinr_and_linear_in_bandwidth) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> sinr(-20, 40), bw(1e3, 1e7), k(0.1, 10);
  for (int i = 0; i < 2000; ++i) {
    const double s = sinr(rng), w = bw(rng), scale = k(rng);
    EXPECT_LT(shannon_rate(w, s), shannon_rate(w, s + 0.01));
    EXPECT_NEAR(shannon_rate(scale * w, s), scale * shannon_rate(w, s), 1e-9 * scale * shannon_rate(w, s));
  }
}

TEST(required_subchannels, examples) {
  EXPECT_EQ(required_subchannels(905000, 905000), 1);
  EXPECT_EQ(required_subchannels(1800000, 904997), 2);
  EXPECT_EQ(required_subchannels(370000, 904997), 1);
}

TEST(required_subchannels, zero_rate_is_infeasible) {
  EXPECT_THROW(required_subchannels(1000, 0.0), InfeasibleDemand);
  EXPECT_THROW(required_subchannels(0.0, 1000), ModelError);
}

TEST(required_subchannels, smallest_sufficient_count) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> req(1.0, 5e6), per(1.0, 2e6);
  for (int i = 0; i < 10000; ++i) {
    const double r = req(rng), p = per(rng);
    const int n = required_subchannels(r, p);
    ASSERT_GE(n * p, r);
    ASSERT_LT((n - 1) * p, r);
  }
  // exact multiples stay exact
  for (int m = 1; m <= 50; ++m) EXPECT_EQ(required_subchannels(m * 0.1, 0.1), m);
}

TEST(valuation, examples) {
  EXPECT_EQ(valuation(1.0, 0.0, 12345.0), 0.0);
  EXPECT_NEAR(valuation(1.2, 904997, 362000), 3.0, 1e-4);
}

TEST(valuation, linear_in_alpha) {
  for (double a : {0.1, 0.8, 1.0, 1.7})
    EXPECT_DOUBLE_EQ(valuation(2 * a, 500000), 2 * valuation(a, 500000));
  EXPECT_THROW(valuation(-1.0, 1.0), ModelError);
  EXPECT_THROW(valuation(1.0, 1.0, 0.0), ModelError);
}

TEST(valuation, default_draw_ranges_interval) {
  // alpha in [0.8, 1.2], SINR in [5, 20] dB at 180 kHz
  const double lo = valuation(0.8, shannon_rate(180000, 5));
  const double hi = valuation(1.2, shannon_rate(180000, 20));
  EXPECT_NEAR(lo, 0.8184026023187252, 1e-12);
  EXPECT_NEAR(hi, 3.9728554703712367, 1e-12);
}

TEST(demand_ratio, examples) {
  EXPECT_DOUBLE_EQ(demand_ratio(6, std::vector<int>(6, 1)), 1.0);
  EXPECT_DOUBLE_EQ(demand_ratio(6, std::vector<int>(16, 1)), 0.375);
  EXPECT_DOUBLE_EQ(demand_ratio(8, std::vector<int>{2, 1, 1}), 2.0);
  EXPECT_THROW(demand_ratio(6, std::vector<int>{}), ModelError);
}

TEST(demand_ratio, regimes) {
  EXPECT_EQ(classify_regime(0.375), DemandRegime::Scarcity);
  EXPECT_EQ(classify_regime(1.0), DemandRegime::Balanced);
  EXPECT_EQ(classify_regime(1.5), DemandRegime::Abundant);
}

TEST(radio_config, reservation_price) {
  RadioConfig radio;
  EXPECT_DOUBLE_EQ(radio.reservation_price(), 6.0 * 0.2);
  EXPECT_NEAR(radio.reservation_price(), 1.2, 1e-15);
  radio.transmit_power_w = 0.0;
  EXPECT_THROW(radio.validate(), ModelError);
}

TEST(channel_draw, consistent_with_primitives) {
  RadioConfig radio;
  UEProfile ue{3, 1.1, 2 * shannon_rate(180000, 12.5), 15.0, StrategyKind::Shaded};
  const auto d = make_channel_draw(ue, radio, 8.0);
  EXPECT_DOUBLE_EQ(d.achievable_rate_bps, shannon_rate(180000, 8.0));
  EXPECT_DOUBLE_EQ(d.valuation_per_channel, valuation(1.1, d.achievable_rate_bps));
  EXPECT_GE(d.demand_subchannels * d.achievable_rate_bps, ue.required_rate_bps);
}
