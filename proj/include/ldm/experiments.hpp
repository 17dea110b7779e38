#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ldm {

inline constexpr const char* kVersion = "0.1.0";

/// Invalid configuration; reported before any file is written.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Names accepted as the "experiment" field and as CLI subcommands.
const std::vector<std::string>& experiment_names();

/// JSON Schema (draft-07) of the config file of every experiment.
nlohmann::json config_schema();

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string out = "out";
  bool plot = false;
  /// Parameter block with every default filled in.
  nlohmann::json params;
};

struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool plot = false;
};

/// Validates `doc` against the schema of `experiment` (unknown keys and
/// type mismatches are ConfigErrors), fills defaults and applies overrides.
ExperimentConfig parse_config(const std::string& experiment, const nlohmann::json& doc, const Overrides& ov = {});

/// Runs one experiment and writes its outputs plus manifest.json into
/// cfg.out. Returns the written file names (relative to cfg.out).
/// Parameter ranges are checked before the output directory is touched.
std::vector<std::string> run_experiment(const ExperimentConfig& cfg);

}  // namespace ldm
