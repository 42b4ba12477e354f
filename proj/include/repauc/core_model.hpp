#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace repauc {

using UeId = int;

// Thrown for malformed inputs to the model primitives.
class ModelError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A UE whose per-channel rate is zero cannot meet any service class.
class InfeasibleDemand : public ModelError {
public:
  using ModelError::ModelError;
};

enum class StrategyKind { Truthful, Shaded, LLM };

// Refill: budget reset to a fresh draw every episode. Static: one budget for
// the whole horizon.
enum class BudgetMode { Refill, Static };

inline std::string_view to_string(StrategyKind kind) {
  switch (kind) {
  case StrategyKind::Truthful: return "truthful";
  case StrategyKind::Shaded: return "shaded";
  case StrategyKind::LLM: return "llm";
  }
  return "unknown";
}

inline StrategyKind parse_strategy(std::string_view name) {
  if (name == "truthful") return StrategyKind::Truthful;
  if (name == "shaded" || name == "heuristic") return StrategyKind::Shaded;
  if (name == "llm") return StrategyKind::LLM;
  throw ModelError("unknown strategy '" + std::string(name) + "'");
}

// Bits per second that correspond to one monetary unit of valuation at
// alpha = 1. Maps alpha * R(15 dB) at alpha = 1.2 to 3.0 units.
inline constexpr double kDefaultRateScaleBps = 362'000.0;

namespace detail {

inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw ModelError(std::string(what) + " must be finite");
}

} // namespace detail

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Shannon capacity of one sub-channel: W * log2(1 + gamma).
inline double shannon_rate(double bandwidth_hz, double sinr_db) {
  detail::require_finite(bandwidth_hz, "bandwidth");
  detail::require_finite(sinr_db, "sinr_db");
  if (bandwidth_hz <= 0.0) throw ModelError("bandwidth must be positive");
  return bandwidth_hz * std::log2(1.0 + db_to_linear(sinr_db));
}

/// Smallest N with N * per_channel >= required.
inline int required_subchannels(double required_rate_bps, double per_channel_rate_bps) {
  detail::require_finite(required_rate_bps, "required rate");
  detail::require_finite(per_channel_rate_bps, "per-channel rate");
  if (required_rate_bps <= 0.0) throw ModelError("required rate must be positive");
  if (per_channel_rate_bps <= 0.0)
    throw InfeasibleDemand("per-channel rate is zero; QoS class cannot be met");
  auto n = static_cast<int>(std::ceil(required_rate_bps / per_channel_rate_bps));
  // ceil of a rounded quotient can be off by one in either direction
  while (n > 1 && (n - 1) * per_channel_rate_bps >= required_rate_bps) --n;
  while (n * per_channel_rate_bps < required_rate_bps) ++n;
  return std::max(n, 1);
}

/// Per-channel valuation: alpha * (rate / rate_scale).
inline double valuation(double alpha, double rate_bps, double rate_scale = kDefaultRateScaleBps) {
  detail::require_finite(alpha, "alpha");
  detail::require_finite(rate_bps, "rate");
  detail::require_finite(rate_scale, "rate scale");
  if (alpha < 0.0 || rate_bps < 0.0) throw ModelError("alpha and rate must be nonnegative");
  if (rate_scale <= 0.0) throw ModelError("rate scale must be positive");
  return alpha * (rate_bps / rate_scale);
}

enum class DemandRegime { Scarcity, Balanced, Abundant };

/// eta = K / sum(N_i).
inline double demand_ratio(int subchannel_count, std::span<const int> demands) {
  if (demands.empty()) throw ModelError("resource-demand ratio undefined for an empty population");
  if (subchannel_count <= 0) throw ModelError("subchannel count must be positive");
  long total = 0;
  for (int d : demands) {
    if (d <= 0) throw ModelError("demands must be positive");
    total += d;
  }
  return static_cast<double>(subchannel_count) / static_cast<double>(total);
}

inline DemandRegime classify_regime(double eta, double balance_tolerance = 1e-9) {
  if (std::abs(eta - 1.0) <= balance_tolerance) return DemandRegime::Balanced;
  return eta < 1.0 ? DemandRegime::Scarcity : DemandRegime::Abundant;
}

struct RadioConfig {
  double bandwidth_per_subchannel_hz = 180'000.0;
  int subchannel_count = 6;
  double transmit_power_w = 0.2;
  double power_unit_price = 6.0;

  void validate() const {
    if (!(bandwidth_per_subchannel_hz > 0.0) || !std::isfinite(bandwidth_per_subchannel_hz))
      throw ModelError("radio.bandwidth_hz must be positive");
    if (subchannel_count <= 0) throw ModelError("subchannels must be positive");
    if (!(transmit_power_w > 0.0) || !std::isfinite(transmit_power_w))
      throw ModelError("radio.transmit_power_w must be positive");
    if (!(power_unit_price > 0.0) || !std::isfinite(power_unit_price))
      throw ModelError("radio.power_unit_price must be positive");
  }

  // r = mu * P
  [[nodiscard]] double reservation_price() const { return power_unit_price * transmit_power_w; }
};

struct UEProfile {
  UeId id = 0;
  double alpha = 1.0;
  double required_rate_bps = 0.0;
  double initial_budget = 0.0;
  StrategyKind strategy = StrategyKind::Shaded;
};

struct ChannelDraw {
  double sinr_db = 0.0;
  double achievable_rate_bps = 0.0;
  double valuation_per_channel = 0.0;
  int demand_subchannels = 1;
};

/// Evaluates rate, valuation and demand for one UE at a given SINR.
inline ChannelDraw make_channel_draw(const UEProfile& ue, const RadioConfig& radio, double sinr_db,
                                     double rate_scale = kDefaultRateScaleBps) {
  ChannelDraw d;
  d.sinr_db = sinr_db;
  d.achievable_rate_bps = shannon_rate(radio.bandwidth_per_subchannel_hz, sinr_db);
  d.valuation_per_channel = valuation(ue.alpha, d.achievable_rate_bps, rate_scale);
  d.demand_subchannels = required_subchannels(ue.required_rate_bps, d.achievable_rate_bps);
  return d;
}

} // namespace repauc
