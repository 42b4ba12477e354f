#pragma once

#include "repauc/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace repauc {

class StrategyError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

struct StrategyParams {
  int f_max = 5;
  int block_duration_episodes = 3;

  void validate() const {
    if (f_max < 2) throw StrategyError("f_max must be at least 2");
    if (block_duration_episodes < 0) throw StrategyError("block_duration must be nonnegative");
  }
};

struct HistoryEntry {
  int episode = 0;
  std::optional<double> own_bid; // empty when the UE did not bid
  bool won = false;
  double payment = 0.0; // total, N_i * pi_i
  double clearing_price = 0.0;
};

struct BidderState {
  UeId ue_id = 0;
  double remaining_budget = 0.0;
  int consecutive_failures = 0;
  std::optional<int> blocked_until_episode;
  std::vector<HistoryEntry> history;

  [[nodiscard]] bool is_blocked(int episode) const {
    return blocked_until_episode && episode <= *blocked_until_episode;
  }
};

inline double truthful_bid(double valuation) {
  if (!(valuation >= 0.0)) throw StrategyError("valuation must be nonnegative");
  return valuation;
}

/// Shading weight log(f+1) / log(F_max), clamped to [0, 1].
inline double shading_weight(int failures, int f_max) {
  if (f_max < 2) throw StrategyError("f_max must be at least 2");
  if (failures < 0) throw StrategyError("failures must be nonnegative");
  return std::clamp(std::log(failures + 1.0) / std::log(static_cast<double>(f_max)), 0.0, 1.0);
}

/// Interpolates from the clearing price (no failures) toward the valuation
/// as consecutive failures accumulate; never exceeds the valuation.
inline double shaded_bid(double valuation, double clearing_price, int failures, int f_max) {
  if (failures > f_max) throw StrategyError("failures exceed f_max");
  const double beta = shading_weight(failures, f_max);
  const double raw = beta * valuation + (1.0 - beta) * clearing_price;
  return std::min(valuation, raw);
}

/// Largest per-channel bid whose worst-case total payment fits the budget.
inline double budget_cap(double bid_per_channel, int demand, double remaining_budget) {
  if (demand < 1) throw StrategyError("demand must be positive");
  return std::min(bid_per_channel, std::max(0.0, remaining_budget) / demand);
}

/// Capped bid, or nullopt when it cannot clear the reserve.
inline std::optional<double> capped_or_abstain(double bid_per_channel, int demand, double remaining_budget,
                                               double reserve) {
  const double capped = budget_cap(bid_per_channel, demand, remaining_budget);
  if (capped < reserve) return std::nullopt;
  return capped;
}

struct RoundResult {
  std::optional<double> own_bid;
  bool won = false;
  double payment_total = 0.0;
  double clearing_price = 0.0;
};

/// Applies one round's result. Only submitted-and-lost rounds count as
/// failures; reaching f_max blocks the UE for the next block_duration
/// episodes and restarts the counter.
inline BidderState update_after_round(BidderState state, const RoundResult& round, int episode,
                                      const StrategyParams& params) {
  if (!state.history.empty() && state.history.back().episode >= episode)
    throw StrategyError("history episodes must be strictly increasing");
  if (round.won) {
    if (round.payment_total > state.remaining_budget + 1e-9)
      throw StrategyError("UE " + std::to_string(state.ue_id) + " payment exceeds remaining budget");
    state.remaining_budget = std::max(0.0, state.remaining_budget - round.payment_total);
    state.consecutive_failures = 0;
  } else if (round.own_bid) {
    if (++state.consecutive_failures >= params.f_max) {
      state.blocked_until_episode = episode + params.block_duration_episodes;
      state.consecutive_failures = 0;
    }
  }
  state.history.push_back({episode, round.own_bid, round.won, round.won ? round.payment_total : 0.0,
                           round.clearing_price});
  return state;
}

} // namespace repauc
