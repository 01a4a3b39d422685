// Command-line runner for the configured experiments.
//
//   offrl run --config <path> [--out <dir>] [--seed <int>] [--jobs <int>]
//   offrl validate --config <path>
//
// A JSON status report goes to stdout. Exit status: 0 success, 2 invalid
// config or inputs, 3 failure while running.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "offrl/scenario.hpp"

namespace fs = std::filesystem;
using offrl::Json;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitRuntime = 3;

void report(const Json& doc) { std::cout << doc.dump(2) << "\n"; }

int invalid(const std::vector<std::string>& findings) {
  report({{"status", "invalid"}, {"findings", findings}});
  for (const auto& f : findings) std::cerr << "offrl: " << f << "\n";
  return kExitInvalid;
}

bool load_config(const fs::path& path, Json& config, std::vector<std::string>& findings) {
  if (!fs::exists(path)) {
    findings.push_back("missing file " + path.string());
    return false;
  }
  try {
    config = Json::parse(offrl::read_text(path));
  } catch (const std::exception& e) {
    findings.push_back(path.string() + ": " + e.what());
    return false;
  }
  return true;
}

fs::path output_dir(const std::string& flag, const Json& config) {
  if (!flag.empty()) return flag;
  if (config.contains("out") && config["out"].is_string()) return config["out"].get<std::string>();
  if (const char* env = std::getenv("OFFRL_OUT_DIR"); env && *env) return env;
  return "results";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline RL decision-rule experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", offrl::offrl_version());

  std::string config_path;
  std::string out_flag;
  std::uint64_t seed = 0;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "Run the scenario described by a config file");
  run->add_option("--config", config_path, "Scenario config (JSON)")->required();
  auto* out_opt = run->add_option("--out", out_flag, "Output directory (default: config 'out', then $OFFRL_OUT_DIR)");
  auto* seed_opt = run->add_option("--seed", seed, "Base seed, overriding the config");
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  (void)out_opt;

  auto* validate = app.add_subcommand("validate", "Check a config and its inputs without running");
  validate->add_option("--config", config_path, "Scenario config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  Json config;
  std::vector<std::string> findings;
  if (!load_config(config_path, config, findings)) return invalid(findings);

  offrl::ScenarioOptions options;
  options.base_dir = fs::path(config_path).parent_path();
  if (options.base_dir.empty()) options.base_dir = ".";
  options.jobs = jobs;
  if (*seed_opt) options.seed = seed;

  findings = offrl::validate_config(config, options);
  if (!findings.empty()) return invalid(findings);
  if (validate->parsed()) {
    report({{"status", "valid"}, {"findings", Json::array()}});
    return 0;
  }

  const fs::path out_dir = output_dir(out_flag, config);
  try {
    const auto result = offrl::run_scenario(config, options);
    const Json effective = offrl::effective_config(config, options);
    offrl::write_artifacts(out_dir, effective, result);
    Json files = Json::array();
    for (const auto& f : result.files) files.push_back(f.first);
    report({{"status", "ok"}, {"scenario", result.scenario}, {"out", out_dir.string()}, {"files", files}});
  } catch (const offrl::ValidationError& e) {
    return invalid(e.findings());
  } catch (const std::exception& e) {
    report({{"status", "error"}, {"message", e.what()}});
    std::cerr << "offrl: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
