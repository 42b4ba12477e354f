#pragma once

// YAML scenario files. Every key is optional; absent keys keep the value of
// the base configuration (the built-in defaults or a preset). Unknown keys are
// rejected with their line number.
//
//   episodes: 20
//   ue_count: 16
//   subchannels: 6
//   seed: 1
//   radio: {bandwidth_hz, transmit_power_w, power_unit_price, rate_scale_bps}
//   draws: {sinr_db: [lo, hi], alpha: [lo, hi], redraw_sinr_each_episode}
//   service_classes: {reference_sinr_db, multiples: [...]}
//   budget: {mode: static|refill, static_budget, refill_epsilon}
//   strategy: {default, assignment: {ue_id: kind}, f_max, block_duration}
//   mechanism: {clearing_price: min|mean}
//   llm: {scripted: echo | {fraction: c} | {replay: [...]}, clamp_to_valuation,
//         history_window, model, temperature, timeout_ms, max_retries, path}
//   sweep: {eta: [...]}

#include "repauc/simulation.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace repauc {

// Settings that only matter to particular presets.
struct RunSettings {
  ScenarioConfig scenario;
  std::vector<double> eta_grid{0.375, 0.75, 1.5};
};

class ConfigParseError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

namespace detail {

inline std::string where(const YAML::Node& node) {
  const auto m = node.Mark();
  if (m.is_null()) return "";
  return "line " + std::to_string(m.line + 1) + ": ";
}

inline void reject_unknown(const YAML::Node& map, std::string_view section,
                           std::initializer_list<std::string_view> known) {
  if (!map.IsMap()) throw ConfigParseError(where(map) + std::string(section) + " must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) {
      std::string full = section.empty() ? key : std::string(section) + "." + key;
      throw ConfigParseError(where(kv.first) + "unknown field '" + full + "'");
    }
  }
}

template <typename T>
void read(const YAML::Node& map, const char* key, T& out, std::string_view section) {
  const auto node = map[key];
  if (!node) return;
  try {
    out = node.as<T>();
  } catch (const YAML::Exception&) {
    std::string full = section.empty() ? key : std::string(section) + "." + key;
    throw ConfigParseError(where(node) + "field '" + full + "' has the wrong type");
  }
}

inline void read_interval(const YAML::Node& map, const char* key, Interval& out, std::string_view section) {
  const auto node = map[key];
  if (!node) return;
  std::vector<double> v;
  read(map, key, v, section);
  if (v.size() != 2) throw ConfigParseError(where(node) + std::string(section) + "." + key + " must be [lo, hi]");
  out = {v[0], v[1]};
}

inline ScriptPolicy read_policy(const YAML::Node& node) {
  if (node.IsScalar()) {
    const auto s = node.as<std::string>();
    if (s == "echo") return EchoValuation{};
    throw ConfigParseError(where(node) + "llm.scripted must be 'echo', {fraction: c} or {replay: [...]}");
  }
  reject_unknown(node, "llm.scripted", {"fraction", "replay"});
  if (node["fraction"]) {
    FixedFraction f;
    read(node, "fraction", f.fraction, "llm.scripted");
    return f;
  }
  if (node["replay"]) {
    Replay r;
    read(node, "replay", r.bids, "llm.scripted");
    return r;
  }
  throw ConfigParseError(where(node) + "llm.scripted mapping needs 'fraction' or 'replay'");
}

inline BudgetMode parse_budget_mode(const YAML::Node& node) {
  const auto s = node.as<std::string>();
  if (s == "static") return BudgetMode::Static;
  if (s == "refill") return BudgetMode::Refill;
  throw ConfigParseError(where(node) + "budget.mode must be 'static' or 'refill'");
}

inline StrategyKind parse_kind(const YAML::Node& node) {
  try {
    return parse_strategy(node.as<std::string>());
  } catch (const ModelError& e) {
    throw ConfigParseError(where(node) + e.what());
  }
}

} // namespace detail

/// Overlays a YAML document on `base` and validates the result.
inline RunSettings load_config_text(const std::string& text, RunSettings base = {}) {
  using namespace detail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigParseError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  auto& cfg = base.scenario;
  if (!root || root.IsNull()) {
    cfg.validate();
    return base;
  }
  reject_unknown(root, "", {"episodes", "ue_count", "subchannels", "seed", "radio", "draws", "service_classes",
                            "budget", "strategy", "mechanism", "llm", "sweep"});
  read(root, "episodes", cfg.episode_count, "");
  read(root, "ue_count", cfg.ue_count, "");
  read(root, "subchannels", cfg.radio.subchannel_count, "");
  read(root, "seed", cfg.rng_seed, "");

  if (auto radio = root["radio"]) {
    reject_unknown(radio, "radio", {"bandwidth_hz", "transmit_power_w", "power_unit_price", "rate_scale_bps"});
    read(radio, "bandwidth_hz", cfg.radio.bandwidth_per_subchannel_hz, "radio");
    read(radio, "transmit_power_w", cfg.radio.transmit_power_w, "radio");
    read(radio, "power_unit_price", cfg.radio.power_unit_price, "radio");
    read(radio, "rate_scale_bps", cfg.rate_scale_bps, "radio");
  }
  if (auto draws = root["draws"]) {
    reject_unknown(draws, "draws", {"sinr_db", "alpha", "redraw_sinr_each_episode"});
    read_interval(draws, "sinr_db", cfg.sinr_db_range, "draws");
    read_interval(draws, "alpha", cfg.alpha_range, "draws");
    read(draws, "redraw_sinr_each_episode", cfg.redraw_sinr_each_episode, "draws");
  }
  if (auto sc = root["service_classes"]) {
    reject_unknown(sc, "service_classes", {"reference_sinr_db", "multiples"});
    read(sc, "reference_sinr_db", cfg.service_classes.reference_sinr_db, "service_classes");
    read(sc, "multiples", cfg.service_classes.multiples, "service_classes");
  }
  if (auto budget = root["budget"]) {
    reject_unknown(budget, "budget", {"mode", "static_budget", "refill_epsilon"});
    if (budget["mode"]) cfg.budget.mode = parse_budget_mode(budget["mode"]);
    read(budget, "static_budget", cfg.budget.static_budget, "budget");
    if (budget["refill_epsilon"]) {
      double eps = 0.0;
      read(budget, "refill_epsilon", eps, "budget");
      cfg.budget.refill_epsilon = eps;
    }
  }
  if (auto strat = root["strategy"]) {
    reject_unknown(strat, "strategy", {"default", "assignment", "f_max", "block_duration"});
    if (strat["default"]) cfg.default_strategy = parse_kind(strat["default"]);
    if (auto assign = strat["assignment"]) {
      if (!assign.IsMap()) throw ConfigParseError(where(assign) + "strategy.assignment must be a mapping");
      cfg.strategy_overrides.clear();
      for (const auto& kv : assign) {
        int id = 0;
        try {
          id = kv.first.as<int>();
        } catch (const YAML::Exception&) {
          throw ConfigParseError(where(kv.first) + "strategy.assignment keys must be UE ids");
        }
        cfg.strategy_overrides[id] = parse_kind(kv.second);
      }
    }
    read(strat, "f_max", cfg.strategy_params.f_max, "strategy");
    read(strat, "block_duration", cfg.strategy_params.block_duration_episodes, "strategy");
  }
  if (auto mech = root["mechanism"]) {
    reject_unknown(mech, "mechanism", {"clearing_price"});
    if (auto cp = mech["clearing_price"]) {
      const auto s = cp.as<std::string>();
      if (s == "min") cfg.clearing_rule = ClearingRule::MinWinningPayment;
      else if (s == "mean") cfg.clearing_rule = ClearingRule::MeanWinningPayment;
      else throw ConfigParseError(where(cp) + "mechanism.clearing_price must be 'min' or 'mean'");
    }
  }
  if (auto llm = root["llm"]) {
    reject_unknown(llm, "llm", {"scripted", "clamp_to_valuation", "history_window", "model", "temperature",
                                "timeout_ms", "max_retries", "path"});
    if (llm["scripted"]) cfg.llm.scripted = read_policy(llm["scripted"]);
    read(llm, "clamp_to_valuation", cfg.llm.clamp_to_valuation, "llm");
    read(llm, "history_window", cfg.llm.history_window, "llm");
    read(llm, "model", cfg.llm.endpoint.model_name, "llm");
    read(llm, "temperature", cfg.llm.endpoint.temperature, "llm");
    read(llm, "max_retries", cfg.llm.endpoint.max_retries, "llm");
    read(llm, "path", cfg.llm.endpoint.path, "llm");
    if (llm["timeout_ms"]) {
      long ms = 0;
      read(llm, "timeout_ms", ms, "llm");
      cfg.llm.endpoint.timeout = std::chrono::milliseconds(ms);
    }
  }
  if (auto sweep = root["sweep"]) {
    reject_unknown(sweep, "sweep", {"eta"});
    read(sweep, "eta", base.eta_grid, "sweep");
    for (double e : base.eta_grid)
      if (!(e > 0.0)) throw ConfigParseError(where(sweep["eta"]) + "sweep.eta values must be positive");
  }
  cfg.validate();
  return base;
}

inline RunSettings load_config(const std::string& path, RunSettings base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return load_config_text(ss.str(), std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

/// Full YAML snapshot; load_config_text(emit_config(s)) reproduces s.
inline std::string emit_config(const RunSettings& settings) {
  const auto& cfg = settings.scenario;
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "episodes" << YAML::Value << cfg.episode_count;
  out << YAML::Key << "ue_count" << YAML::Value << cfg.ue_count;
  out << YAML::Key << "subchannels" << YAML::Value << cfg.radio.subchannel_count;
  out << YAML::Key << "seed" << YAML::Value << cfg.rng_seed;

  out << YAML::Key << "radio" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "bandwidth_hz" << YAML::Value << cfg.radio.bandwidth_per_subchannel_hz;
  out << YAML::Key << "transmit_power_w" << YAML::Value << cfg.radio.transmit_power_w;
  out << YAML::Key << "power_unit_price" << YAML::Value << cfg.radio.power_unit_price;
  out << YAML::Key << "rate_scale_bps" << YAML::Value << cfg.rate_scale_bps;
  out << YAML::EndMap;

  out << YAML::Key << "draws" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "sinr_db" << YAML::Value << YAML::Flow << std::vector<double>{cfg.sinr_db_range.lo, cfg.sinr_db_range.hi};
  out << YAML::Key << "alpha" << YAML::Value << YAML::Flow << std::vector<double>{cfg.alpha_range.lo, cfg.alpha_range.hi};
  out << YAML::Key << "redraw_sinr_each_episode" << YAML::Value << cfg.redraw_sinr_each_episode;
  out << YAML::EndMap;

  out << YAML::Key << "service_classes" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "reference_sinr_db" << YAML::Value << cfg.service_classes.reference_sinr_db;
  out << YAML::Key << "multiples" << YAML::Value << YAML::Flow << cfg.service_classes.multiples;
  out << YAML::EndMap;

  out << YAML::Key << "budget" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << (cfg.budget.mode == BudgetMode::Static ? "static" : "refill");
  out << YAML::Key << "static_budget" << YAML::Value << cfg.budget.static_budget;
  if (cfg.budget.refill_epsilon) out << YAML::Key << "refill_epsilon" << YAML::Value << *cfg.budget.refill_epsilon;
  out << YAML::EndMap;

  out << YAML::Key << "strategy" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "default" << YAML::Value << std::string(to_string(cfg.default_strategy));
  out << YAML::Key << "assignment" << YAML::Value << YAML::BeginMap;
  for (const auto& [id, kind] : cfg.strategy_overrides)
    out << YAML::Key << id << YAML::Value << std::string(to_string(kind));
  out << YAML::EndMap;
  out << YAML::Key << "f_max" << YAML::Value << cfg.strategy_params.f_max;
  out << YAML::Key << "block_duration" << YAML::Value << cfg.strategy_params.block_duration_episodes;
  out << YAML::EndMap;

  out << YAML::Key << "mechanism" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "clearing_price" << YAML::Value
      << (cfg.clearing_rule == ClearingRule::MinWinningPayment ? "min" : "mean");
  out << YAML::EndMap;

  out << YAML::Key << "llm" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "scripted" << YAML::Value;
  if (std::holds_alternative<EchoValuation>(cfg.llm.scripted)) {
    out << "echo";
  } else if (const auto* f = std::get_if<FixedFraction>(&cfg.llm.scripted)) {
    out << YAML::BeginMap << YAML::Key << "fraction" << YAML::Value << f->fraction << YAML::EndMap;
  } else {
    out << YAML::BeginMap << YAML::Key << "replay" << YAML::Value << YAML::Flow
        << std::get<Replay>(cfg.llm.scripted).bids << YAML::EndMap;
  }
  out << YAML::Key << "clamp_to_valuation" << YAML::Value << cfg.llm.clamp_to_valuation;
  out << YAML::Key << "history_window" << YAML::Value << cfg.llm.history_window;
  out << YAML::Key << "model" << YAML::Value << cfg.llm.endpoint.model_name;
  out << YAML::Key << "temperature" << YAML::Value << cfg.llm.endpoint.temperature;
  out << YAML::Key << "timeout_ms" << YAML::Value << static_cast<long>(cfg.llm.endpoint.timeout.count());
  out << YAML::Key << "max_retries" << YAML::Value << cfg.llm.endpoint.max_retries;
  out << YAML::Key << "path" << YAML::Value << cfg.llm.endpoint.path;
  out << YAML::EndMap;

  out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "eta" << YAML::Value << YAML::Flow << settings.eta_grid;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

} // namespace repauc
