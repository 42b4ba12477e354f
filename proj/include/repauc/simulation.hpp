#pragma once

// Repeated auction driver: draws a UE population, runs T episodes of
// bid -> VCG -> settle, and accumulates per-UE and base-station metrics.

#include "repauc/core_model.hpp"
#include "repauc/llm_advisor.hpp"
#include "repauc/mechanism.hpp"
#include "repauc/strategies.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace repauc {

class SimulationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Service classes are multiples of the per-channel rate at a reference SINR.
// The defaults (median SINR, {1, 2, 3}) give demands N_i in {1, 2, 3};
// reference = lowest SINR with multiples {1} gives unit demand everywhere.
struct ServiceClasses {
  double reference_sinr_db = 12.5;
  std::vector<double> multiples{1.0, 2.0, 3.0};
  friend bool operator==(const ServiceClasses&, const ServiceClasses&) = default;
};

struct BudgetConfig {
  BudgetMode mode = BudgetMode::Static;
  double static_budget = 15.0;
  std::optional<double> refill_epsilon; // defaults to 0.1 * r

  [[nodiscard]] double epsilon(double reserve) const { return refill_epsilon.value_or(0.1 * reserve); }
  friend bool operator==(const BudgetConfig&, const BudgetConfig&) = default;
};

struct LlmConfig {
  bool live = false;
  ScriptPolicy scripted = EchoValuation{};
  bool clamp_to_valuation = true;
  int history_window = 10;
  EndpointConfig endpoint;
};

struct ScenarioConfig {
  int episode_count = 20;
  int ue_count = 16;
  RadioConfig radio;
  double rate_scale_bps = kDefaultRateScaleBps;
  Interval sinr_db_range{5.0, 20.0};
  Interval alpha_range{0.8, 1.2};
  bool redraw_sinr_each_episode = false;
  ServiceClasses service_classes;
  BudgetConfig budget;
  StrategyKind default_strategy = StrategyKind::Shaded;
  std::map<UeId, StrategyKind> strategy_overrides{{10, StrategyKind::Truthful}, {13, StrategyKind::LLM}};
  std::uint64_t rng_seed = 1;
  StrategyParams strategy_params;
  ClearingRule clearing_rule = ClearingRule::MinWinningPayment;
  LlmConfig llm;

  [[nodiscard]] double reserve() const { return radio.reservation_price(); }

  [[nodiscard]] StrategyKind strategy_of(UeId id) const {
    auto it = strategy_overrides.find(id);
    return it == strategy_overrides.end() ? default_strategy : it->second;
  }

  void validate() const {
    if (episode_count < 0) throw ConfigError("episodes must be nonnegative");
    if (ue_count <= 0) throw ConfigError("ue_count must be positive");
    try {
      radio.validate();
      strategy_params.validate();
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    if (!(rate_scale_bps > 0.0)) throw ConfigError("radio.rate_scale_bps must be positive");
    if (!(sinr_db_range.lo <= sinr_db_range.hi)) throw ConfigError("draws.sinr_db range is not ordered");
    if (!(alpha_range.lo <= alpha_range.hi) || alpha_range.lo <= 0.0)
      throw ConfigError("draws.alpha range must be ordered and positive");
    if (service_classes.multiples.empty()) throw ConfigError("service_classes.multiples must not be empty");
    for (double m : service_classes.multiples)
      if (!(m > 0.0)) throw ConfigError("service_classes.multiples must be positive");
    if (!(budget.static_budget >= 0.0)) throw ConfigError("budget.static_budget must be nonnegative");
    if (budget.refill_epsilon && !(*budget.refill_epsilon >= 0.0 && *budget.refill_epsilon <= reserve()))
      throw ConfigError("budget.refill_epsilon must lie in [0, r]");
    for (const auto& [id, kind] : strategy_overrides)
      if (id < 1 || id > ue_count)
        throw ConfigError("strategy.assignment names UE " + std::to_string(id) + " outside 1.." +
                          std::to_string(ue_count));
    if (llm.history_window < 0) throw ConfigError("llm.history_window must be nonnegative");
    try {
      llm.endpoint.validate();
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }
};

struct Population {
  std::vector<UEProfile> profiles;  // index i holds UE id i + 1
  std::vector<ChannelDraw> draws;
  std::vector<BidderState> states;
  std::vector<bool> infeasible;     // permanently abstaining
  std::vector<std::string> warnings;

  [[nodiscard]] std::vector<int> demands() const {
    std::vector<int> out;
    for (const auto& d : draws) out.push_back(d.demand_subchannels);
    return out;
  }
};

// Independent RNG streams per purpose so that changing one consumer never
// shifts another's draws.
enum class RngStream : std::uint64_t { Population = 1, Refill = 2, Sinr = 3 };

inline std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

namespace detail {

inline double uniform(std::mt19937_64& rng, Interval range) {
  if (range.lo == range.hi) return range.lo;
  return std::uniform_real_distribution<double>(range.lo, range.hi)(rng);
}

inline void apply_channel_draw(Population& pop, std::size_t i, double sinr_db, const ScenarioConfig& config) {
  const auto& ue = pop.profiles[i];
  auto& draw = pop.draws[i];
  draw.sinr_db = sinr_db;
  draw.achievable_rate_bps = shannon_rate(config.radio.bandwidth_per_subchannel_hz, sinr_db);
  draw.valuation_per_channel = valuation(ue.alpha, draw.achievable_rate_bps, config.rate_scale_bps);
  try {
    draw.demand_subchannels = required_subchannels(ue.required_rate_bps, draw.achievable_rate_bps);
    pop.infeasible[i] = false;
  } catch (const InfeasibleDemand&) {
    draw.demand_subchannels = 1;
    pop.infeasible[i] = true;
    pop.warnings.push_back("UE " + std::to_string(ue.id) + " cannot meet its service class; it abstains");
  }
}

} // namespace detail

/// Draws alpha, SINR and service class for every UE from the population
/// stream and sets initial budgets. Refill-mode budgets start at zero and
/// are set by the first refill.
inline Population init_population(const ScenarioConfig& config) {
  config.validate();
  auto rng = make_rng(config.rng_seed, RngStream::Population);
  const double reference_rate =
      shannon_rate(config.radio.bandwidth_per_subchannel_hz, config.service_classes.reference_sinr_db);
  std::uniform_int_distribution<std::size_t> pick_class(0, config.service_classes.multiples.size() - 1);

  Population pop;
  const auto n = static_cast<std::size_t>(config.ue_count);
  pop.profiles.resize(n);
  pop.draws.resize(n);
  pop.states.resize(n);
  pop.infeasible.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    auto& ue = pop.profiles[i];
    ue.id = static_cast<UeId>(i + 1);
    ue.alpha = detail::uniform(rng, config.alpha_range);
    const double sinr = detail::uniform(rng, config.sinr_db_range);
    ue.required_rate_bps = config.service_classes.multiples[pick_class(rng)] * reference_rate;
    ue.initial_budget = config.budget.mode == BudgetMode::Static ? config.budget.static_budget : 0.0;
    ue.strategy = config.strategy_of(ue.id);
    detail::apply_channel_draw(pop, i, sinr, config);
    pop.states[i].ue_id = ue.id;
    pop.states[i].remaining_budget = ue.initial_budget;
  }
  return pop;
}

/// Refill: every budget is set to a fresh U[r - eps, r + eps] draw.
/// Static: unchanged.
inline std::vector<BidderState> refill_budgets(std::vector<BidderState> states, const BudgetConfig& budget,
                                               double reserve, std::mt19937_64& rng) {
  if (budget.mode == BudgetMode::Static) return states;
  const double eps = budget.epsilon(reserve);
  for (auto& s : states) s.remaining_budget = detail::uniform(rng, {reserve - eps, reserve + eps});
  return states;
}

enum class UeStatus { Bid, Abstained, Blocked, Infeasible };

inline std::string_view to_string(UeStatus s) {
  switch (s) {
  case UeStatus::Bid: return "bid";
  case UeStatus::Abstained: return "abstained";
  case UeStatus::Blocked: return "blocked";
  case UeStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

struct UeEpisode {
  UeId ue_id = 0;
  UeStatus status = UeStatus::Abstained;
  double strategy_bid = 0.0;   // before budget cap
  std::optional<double> submitted;
  std::optional<double> advisor_suggestion;
  bool advisor_fallback = false;
  bool won = false;
  double payment_total = 0.0;
  double utility = 0.0;
  double refill = 0.0;
  double budget_after = 0.0;
};

struct EpisodeRecord {
  int episode = 0;
  std::vector<SealedBid> submitted_bids;
  AuctionOutcome outcome;
  std::map<UeId, double> ue_utility_delta; // quasilinear utility; 0 for losers
  double bs_utility_delta = 0.0;
  std::vector<UeId> abstainers;
  std::vector<UeId> blocked;
  std::vector<UeEpisode> ues;              // ascending id
};

struct MetricsRow {
  UeId ue_id = 0;
  StrategyKind strategy = StrategyKind::Shaded;
  double valuation = 0.0;
  int demand = 1;
  int wins = 0;
  double win_frequency = 0.0;
  double accumulated_utility = 0.0;
  std::optional<int> last_win_episode;
  double initial_budget = 0.0;
  double refills = 0.0;
  double payments = 0.0;
  double final_budget = 0.0;
};

struct MetricsTable {
  std::vector<MetricsRow> rows; // ascending id
  double bs_accumulated_utility = 0.0;
  double eta = 0.0;
  int episodes = 0;
  std::vector<double> clearing_price_series;

  /// Mean last-win episode over the group's UEs that won at least once.
  [[nodiscard]] std::optional<double> mean_last_win_episode(std::optional<StrategyKind> group = {}) const {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : rows) {
      if (group && r.strategy != *group) continue;
      if (r.last_win_episode) {
        sum += *r.last_win_episode;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
  }
};

struct SimulationResult {
  Population population;
  MetricsTable metrics;
  std::vector<EpisodeRecord> episodes;
};

using AdvisorFactory = std::function<std::unique_ptr<BidAdvisor>(UeId)>;

inline AdvisorFactory scripted_advisors(ScriptPolicy policy) {
  return [policy = std::move(policy)](UeId) { return std::make_unique<ScriptedAdvisor>(policy); };
}

/// Stateful episode loop over one population. Advisors are created on
/// construction for every LLM-strategy UE.
class Simulation {
public:
  Simulation(ScenarioConfig config, const AdvisorFactory& advisors)
      : config_(std::move(config)), population_(init_population(config_)),
        refill_rng_(make_rng(config_.rng_seed, RngStream::Refill)),
        sinr_rng_(make_rng(config_.rng_seed, RngStream::Sinr)), clearing_price_(config_.reserve()) {
    for (const auto& ue : population_.profiles) {
      if (ue.strategy != StrategyKind::LLM) continue;
      if (!advisors) throw SimulationError("LLM strategy assigned but no advisor factory supplied");
      advisors_.emplace(ue.id, advisors(ue.id));
    }
    metrics_.episodes = config_.episode_count;
    metrics_.eta = demand_ratio(config_.radio.subchannel_count, population_.demands());
    for (const auto& ue : population_.profiles) {
      MetricsRow row;
      row.ue_id = ue.id;
      row.strategy = ue.strategy;
      row.initial_budget = ue.initial_budget;
      metrics_.rows.push_back(row);
    }
    refresh_row_draws();
  }

  [[nodiscard]] const ScenarioConfig& config() const { return config_; }
  [[nodiscard]] const Population& population() const { return population_; }
  [[nodiscard]] const MetricsTable& metrics() const { return metrics_; }
  [[nodiscard]] double clearing_price() const { return clearing_price_; }
  [[nodiscard]] int next_episode() const { return episode_ + 1; }

  EpisodeRecord run_episode() {
    const int episode = ++episode_;
    const double reserve = config_.reserve();
    const auto n = population_.profiles.size();

    if (config_.redraw_sinr_each_episode) {
      for (std::size_t i = 0; i < n; ++i)
        detail::apply_channel_draw(population_, i, detail::uniform(sinr_rng_, config_.sinr_db_range), config_);
      refresh_row_draws();
    }

    std::vector<double> before(n);
    for (std::size_t i = 0; i < n; ++i) before[i] = population_.states[i].remaining_budget;
    population_.states = refill_budgets(std::move(population_.states), config_.budget, reserve, refill_rng_);

    EpisodeRecord rec;
    rec.episode = episode;
    rec.ues.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& ue = population_.profiles[i];
      const auto& draw = population_.draws[i];
      const auto& state = population_.states[i];
      auto& row = rec.ues[i];
      row.ue_id = ue.id;
      row.refill = state.remaining_budget - before[i];
      metrics_.rows[i].refills += row.refill;

      if (population_.infeasible[i]) {
        row.status = UeStatus::Infeasible;
        rec.abstainers.push_back(ue.id);
        continue;
      }
      if (state.is_blocked(episode)) {
        row.status = UeStatus::Blocked;
        rec.blocked.push_back(ue.id);
        continue;
      }
      row.strategy_bid = strategy_bid(i, episode, row);
      if (auto bid = capped_or_abstain(row.strategy_bid, draw.demand_subchannels, state.remaining_budget, reserve)) {
        row.status = UeStatus::Bid;
        row.submitted = *bid;
        rec.submitted_bids.push_back({ue.id, draw.demand_subchannels, *bid});
      } else {
        row.status = UeStatus::Abstained;
        rec.abstainers.push_back(ue.id);
      }
    }

    rec.outcome = run_auction(rec.submitted_bids, config_.radio.subchannel_count, reserve, clearing_price_,
                              config_.clearing_rule);
    check_outcome(rec);
    clearing_price_ = rec.outcome.clearing_price;
    metrics_.clearing_price_series.push_back(clearing_price_);
    rec.bs_utility_delta = rec.outcome.bs_utility;
    metrics_.bs_accumulated_utility += rec.bs_utility_delta;

    for (std::size_t i = 0; i < n; ++i) {
      auto& row = rec.ues[i];
      auto& mrow = metrics_.rows[i];
      const auto& draw = population_.draws[i];
      RoundResult round;
      round.own_bid = row.submitted;
      round.clearing_price = clearing_price_;
      if (auto it = rec.outcome.payments.find(row.ue_id); it != rec.outcome.payments.end()) {
        round.won = true;
        round.payment_total = draw.demand_subchannels * it->second.per_channel;
        row.won = true;
        row.payment_total = round.payment_total;
        row.utility = draw.demand_subchannels * (draw.valuation_per_channel - it->second.per_channel);
        ++mrow.wins;
        mrow.last_win_episode = episode;
        mrow.payments += round.payment_total;
        mrow.accumulated_utility += row.utility;
      }
      rec.ue_utility_delta[row.ue_id] = row.utility;
      try {
        population_.states[i] =
            update_after_round(std::move(population_.states[i]), round, episode, config_.strategy_params);
      } catch (const StrategyError& e) {
        throw SimulationError("episode " + std::to_string(episode) + ": " + e.what());
      }
      row.budget_after = population_.states[i].remaining_budget;
      mrow.final_budget = row.budget_after;
      mrow.win_frequency =
          config_.episode_count > 0 ? static_cast<double>(mrow.wins) / config_.episode_count : 0.0;
    }
    return rec;
  }

private:
  double strategy_bid(std::size_t i, int episode, UeEpisode& row) {
    const auto& ue = population_.profiles[i];
    const auto& draw = population_.draws[i];
    const auto& state = population_.states[i];
    const double v = draw.valuation_per_channel;
    switch (ue.strategy) {
    case StrategyKind::Truthful:
      return truthful_bid(v);
    case StrategyKind::Shaded:
      return shaded_bid(v, clearing_price_, state.consecutive_failures, config_.strategy_params.f_max);
    case StrategyKind::LLM: {
      const double fallback =
          shaded_bid(v, clearing_price_, state.consecutive_failures, config_.strategy_params.f_max);
      auto decision = request_bid(*advisors_.at(ue.id), prompt_context(i, episode), fallback,
                                  config_.llm.clamp_to_valuation);
      row.advisor_suggestion = decision.suggested;
      row.advisor_fallback = decision.fallback_used;
      return decision.bid;
    }
    }
    return 0.0;
  }

  PromptContext prompt_context(std::size_t i, int episode) const {
    const auto& state = population_.states[i];
    const auto window = static_cast<std::size_t>(config_.llm.history_window);
    PromptContext ctx;
    ctx.valuation_per_channel = population_.draws[i].valuation_per_channel;
    ctx.remaining_budget = state.remaining_budget;
    ctx.demand = population_.draws[i].demand_subchannels;
    const auto& prices = metrics_.clearing_price_series;
    ctx.clearing_price_history.assign(prices.end() - static_cast<std::ptrdiff_t>(std::min(window, prices.size())),
                                      prices.end());
    const auto& hist = state.history;
    for (auto it = hist.end() - static_cast<std::ptrdiff_t>(std::min(window, hist.size())); it != hist.end(); ++it)
      ctx.own_bid_history.push_back({it->episode, it->own_bid, it->won, it->payment});
    ctx.episodes_total = config_.episode_count;
    ctx.episodes_remaining = config_.episode_count - episode + 1;
    ctx.budget_mode = config_.budget.mode;
    return ctx;
  }

  void check_outcome(const EpisodeRecord& rec) const {
    const double reserve = config_.reserve();
    int used = 0;
    for (const auto& b : rec.submitted_bids) {
      auto it = rec.outcome.payments.find(b.ue_id);
      if (it == rec.outcome.payments.end()) continue;
      used += b.demand;
      const double pi = it->second.per_channel;
      if (pi < reserve || pi > b.bid_per_channel)
        throw SimulationError("episode " + std::to_string(rec.episode) + ": UE " + std::to_string(b.ue_id) +
                              " pays " + std::to_string(pi) + " outside [r, bid]");
    }
    if (used > config_.radio.subchannel_count)
      throw SimulationError("episode " + std::to_string(rec.episode) + ": allocation exceeds capacity");
  }

  void refresh_row_draws() {
    for (std::size_t i = 0; i < metrics_.rows.size(); ++i) {
      metrics_.rows[i].valuation = population_.draws[i].valuation_per_channel;
      metrics_.rows[i].demand = population_.draws[i].demand_subchannels;
    }
  }

  ScenarioConfig config_;
  Population population_;
  std::mt19937_64 refill_rng_;
  std::mt19937_64 sinr_rng_;
  std::map<UeId, std::unique_ptr<BidAdvisor>> advisors_;
  MetricsTable metrics_;
  double clearing_price_;
  int episode_ = 0;
};

/// Runs all episodes. Without a factory, LLM UEs use the configured
/// scripted policy.
inline SimulationResult run_simulation(const ScenarioConfig& config, AdvisorFactory advisors = {}) {
  if (!advisors) advisors = scripted_advisors(config.llm.scripted);
  Simulation sim(config, advisors);
  SimulationResult result;
  result.episodes.reserve(static_cast<std::size_t>(config.episode_count));
  for (int t = 0; t < config.episode_count; ++t) result.episodes.push_back(sim.run_episode());
  result.population = sim.population();
  result.metrics = sim.metrics();
  return result;
}

} // namespace repauc
