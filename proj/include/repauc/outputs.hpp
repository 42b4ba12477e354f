#pragma once

// CSV and manifest emission. All files are UTF-8 with LF line endings and
// fixed column order:
//
//   metrics.csv   ue_id,strategy,win_frequency,accumulated_utility,last_win_episode
//   bs.csv        episode,bs_utility_delta,clearing_price
//   episodes.csv  episode,ue_id,strategy,status,strategy_bid,submitted_bid,won,payment,utility,refill,budget_after,advisor_fallback
//   budgets.csv   ue_id,valuation,demand,initial_budget,refills,payments,final_budget
//   eta_sweep.csv eta_target,subchannels,eta,total_demand,mean_win_frequency,truthful_utility,shaded_utility,llm_utility,ue_accumulated_utility,bs_accumulated_utility,min_clearing_price,max_clearing_price
//
// A run directory also gets config.yaml (the full scenario) and
// manifest.json (preset, seed, advisor mode, config, SHA-256 per file).

#include "repauc/config.hpp"
#include "repauc/detail/format.hpp"
#include "repauc/presets.hpp"
#include "repauc/simulation.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

namespace repauc {

class OutputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kMetricsHeader =
    "ue_id,strategy,win_frequency,accumulated_utility,last_win_episode";
inline constexpr std::string_view kBsHeader = "episode,bs_utility_delta,clearing_price";

namespace detail {

inline std::string num(double x) { return format_shortest(x); }

} // namespace detail

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw OutputError("SHA-256 computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

inline std::string metrics_csv(const MetricsTable& m) {
  std::string s(kMetricsHeader);
  s += "\n";
  for (const auto& r : m.rows) {
    s += std::to_string(r.ue_id) + "," + std::string(to_string(r.strategy)) + "," + detail::num(r.win_frequency) +
         "," + detail::num(r.accumulated_utility) + "," +
         (r.last_win_episode ? std::to_string(*r.last_win_episode) : "") + "\n";
  }
  return s;
}

inline std::string bs_csv(const std::vector<EpisodeRecord>& log) {
  std::string s(kBsHeader);
  s += "\n";
  for (const auto& e : log)
    s += std::to_string(e.episode) + "," + detail::num(e.bs_utility_delta) + "," +
         detail::num(e.outcome.clearing_price) + "\n";
  return s;
}

inline std::string episodes_csv(const std::vector<EpisodeRecord>& log, const Population& pop) {
  std::string s = "episode,ue_id,strategy,status,strategy_bid,submitted_bid,won,payment,utility,refill,budget_after,"
                  "advisor_fallback\n";
  for (const auto& e : log) {
    for (const auto& u : e.ues) {
      const auto& ue = pop.profiles.at(static_cast<std::size_t>(u.ue_id - 1));
      s += std::to_string(e.episode) + "," + std::to_string(u.ue_id) + "," + std::string(to_string(ue.strategy)) +
           "," + std::string(to_string(u.status)) + "," + detail::num(u.strategy_bid) + "," +
           (u.submitted ? detail::num(*u.submitted) : "") + "," + (u.won ? "1" : "0") + "," +
           detail::num(u.payment_total) + "," + detail::num(u.utility) + "," + detail::num(u.refill) + "," +
           detail::num(u.budget_after) + "," + (u.advisor_fallback ? "1" : "0") + "\n";
    }
  }
  return s;
}

inline std::string budgets_csv(const MetricsTable& m) {
  std::string s = "ue_id,valuation,demand,initial_budget,refills,payments,final_budget\n";
  for (const auto& r : m.rows)
    s += std::to_string(r.ue_id) + "," + detail::num(r.valuation) + "," + std::to_string(r.demand) + "," +
         detail::num(r.initial_budget) + "," + detail::num(r.refills) + "," + detail::num(r.payments) + "," +
         detail::num(r.final_budget) + "\n";
  return s;
}

inline std::string eta_sweep_csv(const PresetResult& res) {
  std::string s = "eta_target,subchannels,eta,total_demand,mean_win_frequency,truthful_utility,shaded_utility,"
                  "llm_utility,ue_accumulated_utility,bs_accumulated_utility,min_clearing_price,max_clearing_price\n";
  for (const auto& run : res.runs) {
    const auto& m = run.result.metrics;
    int demand = 0;
    double win = 0.0, total = 0.0;
    std::map<StrategyKind, std::pair<double, int>> group;
    for (const auto& r : m.rows) {
      demand += r.demand;
      win += r.win_frequency;
      total += r.accumulated_utility;
      auto& g = group[r.strategy];
      g.first += r.accumulated_utility;
      ++g.second;
    }
    auto group_mean = [&](StrategyKind k) {
      auto it = group.find(k);
      return it == group.end() ? std::string() : detail::num(it->second.first / it->second.second);
    };
    const auto& prices = m.clearing_price_series;
    const auto [lo, hi] = prices.empty() ? std::pair{0.0, 0.0}
                                         : std::pair{*std::min_element(prices.begin(), prices.end()),
                                                     *std::max_element(prices.begin(), prices.end())};
    s += detail::num(run.eta_target.value_or(m.eta)) + "," + std::to_string(run.config.radio.subchannel_count) + "," +
         detail::num(m.eta) + "," + std::to_string(demand) + "," +
         detail::num(m.rows.empty() ? 0.0 : win / static_cast<double>(m.rows.size())) + "," +
         group_mean(StrategyKind::Truthful) + "," + group_mean(StrategyKind::Shaded) + "," +
         group_mean(StrategyKind::LLM) + "," + detail::num(total) + "," + detail::num(m.bs_accumulated_utility) +
         "," + detail::num(lo) + "," + detail::num(hi) + "\n";
  }
  return s;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw OutputError("write to '" + path.string() + "' failed");
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw OutputError("cannot create directory '" + dir.string() + "': " + ec.message());
}

} // namespace detail

/// Writes one run's CSVs into `dir`; returns relative name -> SHA-256.
inline std::map<std::string, std::string> emit_outputs(const SimulationResult& result, const std::filesystem::path& dir) {
  detail::ensure_dir(dir);
  const std::pair<const char*, std::string> files[] = {
      {"metrics.csv", metrics_csv(result.metrics)},
      {"bs.csv", bs_csv(result.episodes)},
      {"episodes.csv", episodes_csv(result.episodes, result.population)},
      {"budgets.csv", budgets_csv(result.metrics)},
  };
  std::map<std::string, std::string> sums;
  for (const auto& [name, content] : files) {
    detail::write_file(dir / name, content);
    sums[name] = sha256_hex(content);
  }
  return sums;
}

struct RunManifest {
  Preset preset = Preset::Custom;
  RunSettings settings;
  bool live_llm = false;
  std::string output_dir;
  std::map<std::string, std::string> checksums;
};

inline nlohmann::json manifest_json(const RunManifest& m) {
  nlohmann::json j;
  j["preset"] = std::string(to_string(m.preset));
  j["seed"] = m.settings.scenario.rng_seed;
  j["advisor_mode"] = m.live_llm ? "live" : "scripted";
  j["output_dir"] = m.output_dir;
  j["config"] = emit_config(m.settings);
  j["artifacts"] = m.checksums;
  return j;
}

inline RunManifest parse_manifest(const nlohmann::json& j) {
  RunManifest m;
  try {
    auto preset = parse_preset(j.at("preset").get<std::string>());
    if (!preset) throw ConfigError("manifest names an unknown preset");
    m.preset = *preset;
    m.settings = load_config_text(j.at("config").get<std::string>());
    m.settings.scenario.rng_seed = j.at("seed").get<std::uint64_t>();
    m.live_llm = j.at("advisor_mode").get<std::string>() == "live";
    m.output_dir = j.value("output_dir", "");
    m.checksums = j.value("artifacts", std::map<std::string, std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

/// Writes every artifact of a preset run plus config.yaml and manifest.json.
inline RunManifest write_preset_outputs(const PresetResult& res, const RunSettings& settings, bool live_llm,
                                        const std::filesystem::path& dir) {
  detail::ensure_dir(dir);
  RunManifest manifest{res.preset, settings, live_llm, dir.string(), {}};
  if (res.preset == Preset::EtaSweep) {
    const auto summary = eta_sweep_csv(res);
    detail::write_file(dir / "eta_sweep.csv", summary);
    manifest.checksums["eta_sweep.csv"] = sha256_hex(summary);
    for (const auto& run : res.runs)
      for (const auto& [name, sum] : emit_outputs(run.result, dir / run.label))
        manifest.checksums[run.label + "/" + name] = sum;
  } else {
    for (const auto& run : res.runs)
      for (const auto& [name, sum] : emit_outputs(run.result, dir)) manifest.checksums[name] = sum;
  }
  const auto config_text = emit_config(settings);
  detail::write_file(dir / "config.yaml", config_text);
  manifest.checksums["config.yaml"] = sha256_hex(config_text);
  detail::write_file(dir / "manifest.json", manifest_json(manifest).dump(2) + "\n");
  return manifest;
}

} // namespace repauc
