#include "repauc/strategies.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace repauc;

TEST(truthful_bid, identity) {
  EXPECT_EQ(truthful_bid(0.0), 0.0);
  EXPECT_EQ(truthful_bid(3.5), 3.5);
  EXPECT_EQ(truthful_bid(1.0), 1.0);
}

TEST(shaded_bid, examples) {
  EXPECT_DOUBLE_EQ(shaded_bid(3.0, 2.0, 0, 10), 2.0);
  EXPECT_DOUBLE_EQ(shaded_bid(3.0, 2.0, 9, 10), 3.0);
  EXPECT_DOUBLE_EQ(shaded_bid(1.5, 2.0, 0, 10), 1.5);
  // beta = ln 4 / ln 10
  EXPECT_NEAR(shaded_bid(3.0, 2.0, 3, 10), 2.6020599913279625, 1e-12);
}

TEST(shaded_bid, last_failure_before_block_bids_valuation) {
  // f = F_max - 1 gives log(F_max)/log(F_max) = 1
  EXPECT_DOUBLE_EQ(shaded_bid(2.7, 1.3, 4, 5), 2.7);
}

TEST(shaded_bid, rejects_bad_parameters) {
  EXPECT_THROW(shaded_bid(3.0, 2.0, 0, 1), StrategyError);
  EXPECT_THROW(shaded_bid(3.0, 2.0, 11, 10), StrategyError);
  EXPECT_THROW((StrategyParams{1, 3}.validate()), StrategyError);
}

TEST(shaded_bid, bounded_and_monotone_in_failures) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> price(0.0, 5.0);
  std::uniform_int_distribution<int> fmax(2, 20);
  for (int t = 0; t < 5000; ++t) {
    const double v = price(rng), clr = price(rng);
    const int F = fmax(rng);
    double prev = -1.0;
    for (int f = 0; f <= F; ++f) {
      const double b = shaded_bid(v, clr, f, F);
      ASSERT_GE(b, std::min(v, clr) - 1e-12);
      ASSERT_LE(b, v);
      if (v >= clr) {
        ASSERT_GE(b, prev - 1e-12);
      }
      prev = b;
    }
  }
}

TEST(budget_cap, examples) {
  EXPECT_EQ(budget_cap(3.0, 1, 15.0), 3.0);
  EXPECT_EQ(budget_cap(3.0, 2, 4.0), 2.0);
  EXPECT_EQ(budget_cap(3.0, 1, 0.5), 0.5);
  EXPECT_FALSE(capped_or_abstain(3.0, 1, 0.5, 1.2).has_value());
  EXPECT_EQ(capped_or_abstain(3.0, 2, 4.0, 1.2), 2.0);
  EXPECT_THROW(budget_cap(1.0, 0, 1.0), StrategyError);
}

TEST(update_after_round, win_spends_budget_and_resets_failures) {
  BidderState s{1, 15.0, 2, std::nullopt, {}};
  const auto next = update_after_round(s, {2.4, true, 2.4, 2.4}, 1, {});
  EXPECT_NEAR(next.remaining_budget, 12.6, 1e-12);
  EXPECT_EQ(next.consecutive_failures, 0);
  ASSERT_EQ(next.history.size(), 1u);
  EXPECT_TRUE(next.history[0].won);
}

TEST(update_after_round, reaching_f_max_blocks) {
  BidderState s{1, 15.0, 4, std::nullopt, {}};
  const auto next = update_after_round(s, {2.0, false, 0.0, 2.5}, 7, {5, 3});
  EXPECT_EQ(next.blocked_until_episode, 10);
  EXPECT_EQ(next.consecutive_failures, 0);
  EXPECT_TRUE(next.is_blocked(8));
  EXPECT_TRUE(next.is_blocked(10));
  EXPECT_FALSE(next.is_blocked(11));
}

TEST(update_after_round, loss_counts_abstention_does_not) {
  BidderState s{1, 15.0, 0, std::nullopt, {}};
  auto lost = update_after_round(s, {2.0, false, 0.0, 2.5}, 1, {});
  EXPECT_EQ(lost.consecutive_failures, 1);
  EXPECT_EQ(lost.remaining_budget, 15.0);
  auto idle = update_after_round(lost, {std::nullopt, false, 0.0, 2.5}, 2, {});
  EXPECT_EQ(idle.consecutive_failures, 1);
}

TEST(update_after_round, overdraft_and_history_order_are_errors) {
  BidderState s{1, 1.0, 0, std::nullopt, {}};
  EXPECT_THROW(update_after_round(s, {2.0, true, 2.0, 2.0}, 1, {}), StrategyError);
  auto once = update_after_round(s, {std::nullopt, false, 0.0, 1.2}, 3, {});
  EXPECT_THROW(update_after_round(once, {std::nullopt, false, 0.0, 1.2}, 3, {}), StrategyError);
}
