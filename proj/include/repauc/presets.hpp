#pragma once

// Named experiment scenarios and the runner that executes them.

#include "repauc/config.hpp"
#include "repauc/simulation.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace repauc {

enum class Preset { Custom, Refill, Static, EtaSweep, AllTruthful, AllHeuristic, AllLlm };

inline constexpr Preset kAllPresets[] = {Preset::Refill,      Preset::Static,       Preset::EtaSweep,
                                         Preset::AllTruthful, Preset::AllHeuristic, Preset::AllLlm};

inline std::string_view to_string(Preset p) {
  switch (p) {
  case Preset::Custom: return "custom";
  case Preset::Refill: return "refill";
  case Preset::Static: return "static";
  case Preset::EtaSweep: return "eta_sweep";
  case Preset::AllTruthful: return "all_truthful";
  case Preset::AllHeuristic: return "all_heuristic";
  case Preset::AllLlm: return "all_llm";
  }
  return "unknown";
}

inline std::optional<Preset> parse_preset(std::string_view name) {
  for (auto p : {Preset::Custom, Preset::Refill, Preset::Static, Preset::EtaSweep, Preset::AllTruthful,
                 Preset::AllHeuristic, Preset::AllLlm})
    if (to_string(p) == name) return p;
  return std::nullopt;
}

// Budget large enough that reserve-price wins in every episode stay
// affordable (20 episodes at r = 1.2 cost 24).
inline constexpr double kSweepStaticBudget = 30.0;

inline constexpr double kPacingFraction = 0.85;

/// Every UE needs exactly one sub-channel: the service class equals the
/// per-channel rate at the lowest SINR in the draw range.
inline void use_unit_demand(ScenarioConfig& cfg) {
  cfg.service_classes.reference_sinr_db = cfg.sinr_db_range.lo;
  cfg.service_classes.multiples = {1.0};
}

/// Base settings for a preset; a config file is overlaid on top of these.
inline RunSettings preset_settings(Preset preset) {
  RunSettings s;
  auto& cfg = s.scenario;
  switch (preset) {
  case Preset::Custom:
    break;
  case Preset::Refill:
    use_unit_demand(cfg);
    cfg.budget.mode = BudgetMode::Refill;
    cfg.llm.scripted = EchoValuation{};
    break;
  case Preset::Static:
    use_unit_demand(cfg);
    cfg.budget.mode = BudgetMode::Static;
    cfg.llm.scripted = FixedFraction{kPacingFraction};
    break;
  case Preset::EtaSweep:
    use_unit_demand(cfg);
    cfg.budget.mode = BudgetMode::Static;
    cfg.budget.static_budget = kSweepStaticBudget;
    cfg.llm.scripted = FixedFraction{kPacingFraction};
    break;
  case Preset::AllTruthful:
  case Preset::AllHeuristic:
  case Preset::AllLlm:
    use_unit_demand(cfg);
    cfg.budget.mode = BudgetMode::Static;
    cfg.strategy_overrides.clear();
    cfg.default_strategy = preset == Preset::AllTruthful    ? StrategyKind::Truthful
                           : preset == Preset::AllHeuristic ? StrategyKind::Shaded
                                                            : StrategyKind::LLM;
    cfg.llm.scripted = FixedFraction{kPacingFraction};
    break;
  }
  return s;
}

struct ScenarioRun {
  std::string label;
  std::optional<double> eta_target;
  ScenarioConfig config;
  SimulationResult result;
};

struct PresetResult {
  Preset preset = Preset::Custom;
  std::vector<ScenarioRun> runs;
};

/// Sub-channel count giving resource-demand ratio closest to `eta` for a
/// fixed total demand.
inline int subchannels_for_eta(double eta, int total_demand) {
  return std::max(1, static_cast<int>(std::lround(eta * total_demand)));
}

/// Runs the preset. eta_sweep keeps the population (and so total demand)
/// fixed and varies K; its points run concurrently, each with its own
/// simulation state.
inline PresetResult run_preset(Preset preset, const RunSettings& settings, const AdvisorFactory& advisors = {}) {
  PresetResult out;
  out.preset = preset;
  if (preset != Preset::EtaSweep) {
    out.runs.push_back({std::string(to_string(preset)), std::nullopt, settings.scenario,
                        run_simulation(settings.scenario, advisors)});
    return out;
  }

  const auto demands = init_population(settings.scenario).demands();
  int total = 0;
  for (int d : demands) total += d;

  std::vector<std::future<ScenarioRun>> jobs;
  for (double eta : settings.eta_grid) {
    ScenarioConfig cfg = settings.scenario;
    cfg.radio.subchannel_count = subchannels_for_eta(eta, total);
    jobs.push_back(std::async(std::launch::async, [cfg, eta, advisors] {
      ScenarioRun run;
      run.label = "eta_" + detail::format_shortest(eta);
      run.eta_target = eta;
      run.config = cfg;
      run.result = run_simulation(cfg, advisors);
      return run;
    }));
  }
  for (auto& j : jobs) out.runs.push_back(j.get());
  return out;
}

} // namespace repauc
