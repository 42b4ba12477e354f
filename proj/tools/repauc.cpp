// Command-line front end: runs preset or custom scenarios and writes CSVs.

#include "repauc/llm_http.hpp"
#include "repauc/outputs.hpp"
#include "repauc/presets.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

std::string env_help() {
  return std::string("Live LLM bidding (--live-llm) reads:\n  ") + repauc::kEnvLlmUrl +
         "      chat-completion base URL, e.g. https://api.openai.com\n  " + repauc::kEnvLlmApiKey +
         "  bearer token\n  " + repauc::kEnvLlmModel + "    model name (optional, default gpt-5-mini)\n";
}

std::string preset_list() {
  std::string s = "custom";
  for (auto p : repauc::kAllPresets) s += std::string(", ") + std::string(repauc::to_string(p));
  return s;
}

struct RunOptions {
  std::string config_path;
  std::string manifest_path;
  std::optional<std::uint64_t> seed;
  std::string preset = "custom";
  std::string out_dir;
  bool live_llm = false;
};

int run(const RunOptions& opt) {
  using namespace repauc;
  Preset preset = Preset::Custom;
  RunSettings settings;
  bool live = opt.live_llm;

  if (!opt.manifest_path.empty()) {
    std::ifstream in(opt.manifest_path);
    if (!in) throw ConfigError("cannot open manifest '" + opt.manifest_path + "'");
    RunManifest m;
    try {
      m = parse_manifest(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(opt.manifest_path + ": " + e.what());
    }
    preset = m.preset;
    settings = m.settings;
    live = live || m.live_llm;
  } else {
    auto p = parse_preset(opt.preset);
    if (!p) throw ConfigError("unknown preset '" + opt.preset + "' (choose from " + preset_list() + ")");
    preset = *p;
    settings = preset_settings(preset);
    if (!opt.config_path.empty()) settings = load_config(opt.config_path, settings);
  }
  if (opt.seed) settings.scenario.rng_seed = *opt.seed;
  settings.scenario.llm.live = live;

  AdvisorFactory advisors;
  if (live) {
    const auto endpoint = endpoint_from_env(settings.scenario.llm.endpoint);
    advisors = [endpoint](UeId) { return make_http_advisor(endpoint); };
  }

  const auto result = run_preset(preset, settings, advisors);
  const auto manifest = write_preset_outputs(result, settings, live, opt.out_dir);

  for (const auto& r : result.runs) {
    const auto& m = r.result.metrics;
    std::cout << r.label << ": K=" << r.config.radio.subchannel_count << " eta=" << m.eta
              << " bs_utility=" << m.bs_accumulated_utility << "\n";
    for (auto kind : {StrategyKind::Truthful, StrategyKind::Shaded, StrategyKind::LLM})
      if (auto last = m.mean_last_win_episode(kind))
        std::cout << "  mean last win (" << to_string(kind) << "): " << *last << "\n";
  }
  std::cout << "wrote " << manifest.checksums.size() << " artifacts to " << opt.out_dir << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repeated budget-constrained VCG spectrum auction simulator"};
  app.footer(env_help());
  app.require_subcommand(1);

  RunOptions opt;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write CSV outputs");
  run_cmd->add_option("--config", opt.config_path, "YAML scenario overlaid on the preset")->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", opt.seed, "RNG seed (overrides config)");
  run_cmd->add_option("--preset", opt.preset, "One of: " + preset_list())->capture_default_str();
  run_cmd->add_option("--out", opt.out_dir, "Output directory")->required();
  run_cmd->add_flag("--live-llm", opt.live_llm, "Query a live chat-completion endpoint for LLM bidders");
  auto* manifest_opt =
      run_cmd->add_option("--manifest", opt.manifest_path, "Re-run the scenario recorded in a manifest.json")
          ->check(CLI::ExistingFile);
  manifest_opt->excludes(run_cmd->get_option("--config"));
  manifest_opt->excludes(run_cmd->get_option("--preset"));
  run_cmd->footer(env_help());

  std::string print_preset = "custom";
  auto* print_cmd = app.add_subcommand("print-config", "Print the full YAML configuration of a preset");
  print_cmd->add_option("--preset", print_preset, "One of: " + preset_list())->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(opt);
    if (*print_cmd) {
      auto p = repauc::parse_preset(print_preset);
      if (!p) throw repauc::ConfigError("unknown preset '" + print_preset + "'");
      std::cout << repauc::emit_config(repauc::preset_settings(*p));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
