#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "pipeline.hpp"
#include "tradesbm/log.hpp"

int main(int argc, char** argv) {
  using namespace tradesbm::cli;

  CLI::App app{"tradesbm: temporal trade networks and dynamic blockmodels"};
  app.set_version_flag("--version", TRADESBM_VERSION);
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string log_level = "info";
  RawConfig flags;
  app.add_option("--config", config_path, "flat key = value file; flags override it");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  // Values are kept as text so that validation reports every bad field at once.
  const std::vector<std::pair<std::string, std::string>> options{
      {"input", "flow table CSV"},
      {"code-map", "raw,canonical[,retired_after] CSV"},
      {"strict-codes", "reject codes missing from the code map (true/false)"},
      {"orientation", "import column layout: mirror or reporter"},
      {"years", "study window A..B"},
      {"kinds", "network kinds, e.g. X,I,NX"},
      {"tau", "tie cutoff in [0, 1)"},
      {"keep-isolated", "keep traded countries with no retained tie (true/false)"},
      {"q", "number of groups"},
      {"q-range", "group counts A..B for sweep-q"},
      {"restarts", "EM restarts"},
      {"max-iters", "EM iteration cap"},
      {"seed", "master seed"},
      {"threads", "E-step worker threads"},
      {"tiers", "tier cut points c1,c2"},
      {"tier-overrides", "cluster:tier pairs"},
      {"strength", "trade_share or retained_degree"},
      {"concentration", "hhi or entropy"},
      {"out", "output directory"},
  };
  for (const auto& [name, help] : options) {
    std::string key = name;
    std::replace(key.begin(), key.end(), '-', '_');
    app.add_option_function<std::string>(
        "--" + name, [&flags, key](const std::string& v) { flags[key] = v; }, help);
  }

  std::string command;
  for (const auto& cmd : commands()) {
    app.add_subcommand(cmd, cmd == "all" ? "ingest, build, [sweep-q,] fit, metrics, tiers, export" : "run one stage")
        ->fallthrough()
        ->callback([&command, cmd] { command = cmd; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  tradesbm::logger()->set_level(spdlog::level::from_str(log_level));

  RawConfig raw;
  if (!config_path.empty()) {
    try {
      raw = read_config_file(config_path);
    } catch (const ValidationError&) {
      return run(command, {{"config", config_path}});
    }
  }
  for (const auto& [k, v] : flags) raw[k] = v;
  return run(command, raw);
}
