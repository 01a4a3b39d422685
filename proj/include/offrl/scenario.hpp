#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "offrl/io.hpp"

namespace offrl {

/// Library version recorded in manifests.
std::string offrl_version();

/// Scenario names accepted in the "scenario" field of a config.
const std::vector<std::string>& scenario_names();

struct ScenarioOptions {
  /// Overrides the config's "seed" field.
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  /// Directory that relative input paths are resolved against.
  std::filesystem::path base_dir = ".";
};

struct ScenarioResult {
  std::string scenario;
  Json summary;
  /// Artifact name and content, written in this order.
  std::vector<std::pair<std::string, std::string>> files;
};

/// Every problem with the config and the inputs it references, without
/// running anything. An empty list means the config is runnable.
std::vector<std::string> validate_config(const Json& config, const ScenarioOptions& options = {});

/// Runs the configured scenario. Throws ValidationError listing every
/// finding when the config is invalid.
ScenarioResult run_scenario(const Json& config, const ScenarioOptions& options = {});

/// Config with the options folded in, as recorded in the manifest.
Json effective_config(const Json& config, const ScenarioOptions& options);

/// {tool, version, scenario, seed, config_hash, files}.
Json make_manifest(const Json& config, const ScenarioResult& result);

/// Writes the artifacts, summary.json and manifest.json under `out_dir`.
void write_artifacts(const std::filesystem::path& out_dir, const Json& config, const ScenarioResult& result);

}  // namespace offrl
