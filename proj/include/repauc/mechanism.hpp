#pragma once

// VCG winner determination and Clarke pivot payments for homogeneous
// sub-channels. Each bid asks for N_i channels at kappa_i per channel; the
// base station keeps a per-channel reserve r.

#include "repauc/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace repauc {

class MechanismError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

struct SealedBid {
  UeId ue_id = 0;
  int demand = 1;
  double bid_per_channel = 0.0;
};

struct Payment {
  double pivot = 0.0;       // p_i, welfare units
  double per_channel = 0.0; // pi_i
};

enum class ClearingRule { MinWinningPayment, MeanWinningPayment };

struct WelfareSolution {
  std::vector<UeId> winners; // ascending
  double welfare = 0.0;
  int channels_used = 0;
};

struct AuctionOutcome {
  std::vector<UeId> winners; // ascending
  std::map<UeId, Payment> payments;
  double welfare = 0.0;
  double clearing_price = 0.0;
  double bs_utility = 0.0;

  [[nodiscard]] bool won(UeId id) const { return payments.contains(id); }
};

// Allocations whose welfare differs by less than this are treated as tied.
inline constexpr double kWelfareTieTolerance = 1e-10;

namespace detail {

inline void validate_bids(std::span<const SealedBid> bids) {
  std::unordered_set<UeId> seen;
  for (const auto& b : bids) {
    if (b.demand < 1) throw MechanismError("bid from UE " + std::to_string(b.ue_id) + " has demand < 1");
    if (!std::isfinite(b.bid_per_channel) || b.bid_per_channel < 0.0)
      throw MechanismError("bid from UE " + std::to_string(b.ue_id) + " is negative or non-finite");
    if (!seen.insert(b.ue_id).second)
      throw MechanismError("duplicate bid from UE " + std::to_string(b.ue_id));
  }
}

inline double bid_value(const SealedBid& b, double reserve) {
  return b.demand * (b.bid_per_channel - reserve);
}

// Bids clearing the reserve, sorted by UE id.
inline std::vector<SealedBid> admitted_bids(std::span<const SealedBid> bids, double reserve) {
  std::vector<SealedBid> out;
  for (const auto& b : bids)
    if (b.bid_per_channel >= reserve) out.push_back(b);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.ue_id < b.ue_id; });
  return out;
}

// Sums values in ascending id order so equal sets give bit-identical welfare.
inline double canonical_welfare(std::span<const SealedBid> sorted_bids, std::span<const UeId> winners,
                                double reserve) {
  double total = 0.0;
  std::size_t w = 0;
  for (const auto& b : sorted_bids) {
    if (w < winners.size() && winners[w] == b.ue_id) {
      total += bid_value(b, reserve);
      ++w;
    }
  }
  return total;
}

} // namespace detail

/// Exact welfare maximization by dynamic programming over capacity.
///
/// Among allocations of equal welfare the one serving more channels wins,
/// then the lexicographically smallest id set. Bids below the reserve are
/// dropped before solving; bids exactly at the reserve carry zero value and
/// are served whenever capacity allows.
inline WelfareSolution solve_welfare(std::span<const SealedBid> bids, int capacity, double reserve) {
  if (capacity < 1) throw MechanismError("capacity must be at least 1");
  if (!std::isfinite(reserve) || reserve < 0.0) throw MechanismError("reserve must be finite and nonnegative");
  detail::validate_bids(bids);

  const auto items = detail::admitted_bids(bids, reserve);
  const std::size_t n = items.size();
  const auto width = static_cast<std::size_t>(capacity) + 1;

  struct Cell {
    double welfare = 0.0;
    int channels = 0;
  };
  // best[i * width + c]: optimum over items[i..n) with capacity c.
  std::vector<Cell> best((n + 1) * width);
  std::vector<std::uint8_t> take(n * width, 0);

  for (std::size_t i = n; i-- > 0;) {
    const auto& item = items[i];
    const double value = detail::bid_value(item, reserve);
    for (std::size_t c = 0; c < width; ++c) {
      Cell skip = best[(i + 1) * width + c];
      Cell chosen = skip;
      if (static_cast<std::size_t>(item.demand) <= c) {
        const Cell& rest = best[(i + 1) * width + (c - item.demand)];
        Cell with{value + rest.welfare, item.demand + rest.channels};
        bool prefer_take;
        if (std::abs(with.welfare - skip.welfare) > kWelfareTieTolerance)
          prefer_take = with.welfare > skip.welfare;
        else if (with.channels != skip.channels)
          prefer_take = with.channels > skip.channels;
        else
          prefer_take = true; // set led by items[i] is lexicographically smaller
        if (prefer_take) {
          chosen = with;
          take[i * width + c] = 1;
        }
      }
      best[i * width + c] = chosen;
    }
  }

  WelfareSolution sol;
  std::size_t c = width - 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (take[i * width + c]) {
      sol.winners.push_back(items[i].ue_id);
      sol.channels_used += items[i].demand;
      c -= static_cast<std::size_t>(items[i].demand);
    }
  }
  sol.welfare = detail::canonical_welfare(items, sol.winners, reserve);
  return sol;
}

/// Clarke pivot payments for a welfare-optimal winner set.
inline std::map<UeId, Payment> vcg_payments(std::span<const SealedBid> bids, int capacity, double reserve,
                                            std::span<const UeId> winner_set) {
  detail::validate_bids(bids);
  std::vector<UeId> winners(winner_set.begin(), winner_set.end());
  std::sort(winners.begin(), winners.end());
  if (std::adjacent_find(winners.begin(), winners.end()) != winners.end())
    throw MechanismError("winner set contains duplicates");

  const auto items = detail::admitted_bids(bids, reserve);
  std::map<UeId, const SealedBid*> by_id;
  for (const auto& b : items) by_id.emplace(b.ue_id, &b);

  int used = 0;
  for (UeId id : winners) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw MechanismError("winner " + std::to_string(id) + " has no admitted bid");
    used += it->second->demand;
  }
  if (used > capacity) throw MechanismError("winner set exceeds capacity");

  const double welfare = detail::canonical_welfare(items, winners, reserve);
  const double optimum = solve_welfare(bids, capacity, reserve).welfare;
  if (welfare < optimum - 1e-9) throw MechanismError("winner set is not welfare-optimal");

  std::map<UeId, Payment> out;
  std::vector<SealedBid> others;
  others.reserve(bids.size());
  for (UeId id : winners) {
    const SealedBid& mine = *by_id.at(id);
    others.clear();
    for (const auto& b : bids)
      if (b.ue_id != id) others.push_back(b);
    const double without = solve_welfare(others, capacity, reserve).welfare;
    const double value = detail::bid_value(mine, reserve);
    const double others_with = welfare - value;
    const double pivot = std::clamp(without - others_with, 0.0, value);
    out.emplace(id, Payment{pivot, std::clamp(reserve + pivot / mine.demand, reserve, mine.bid_per_channel)});
  }
  return out;
}

/// Winner determination, payments and the round's clearing price.
/// With no winners the clearing price is `previous_clearing_price`.
inline AuctionOutcome run_auction(std::span<const SealedBid> bids, int capacity, double reserve,
                                  double previous_clearing_price,
                                  ClearingRule rule = ClearingRule::MinWinningPayment) {
  auto sol = solve_welfare(bids, capacity, reserve);
  AuctionOutcome out;
  out.payments = vcg_payments(bids, capacity, reserve, sol.winners);
  out.winners = std::move(sol.winners);
  out.welfare = sol.welfare;
  out.clearing_price = previous_clearing_price;
  if (!out.payments.empty()) {
    double lo = out.payments.begin()->second.per_channel;
    double sum = 0.0;
    for (const auto& [id, p] : out.payments) {
      lo = std::min(lo, p.per_channel);
      sum += p.per_channel;
    }
    out.clearing_price =
        rule == ClearingRule::MinWinningPayment ? lo : sum / static_cast<double>(out.payments.size());
  }
  for (const auto& [id, p] : out.payments) out.bs_utility += p.pivot;
  return out;
}

} // namespace repauc
