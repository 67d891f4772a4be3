#pragma once

#include "cbfcert/rollout.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace cbfcert {

/// Everything a config file can set: one experiment plus the sweep grids
/// used by reproduce-table1 and sweep-psi.
struct ToolConfig {
  ExperimentConfig experiment;
  std::vector<double> table1_noise_bounds{0.01, 0.03, 0.05};
  std::vector<std::size_t> table1_agent_counts{2, 3};
  std::vector<double> psi_grid{0.0, 2.0, 4.0, 6.0, 8.0, 10.0};
  std::size_t psi_sweep_rollouts = 100;

  void validate() const;
};

/// Parses a flat JSON object; missing keys take their defaults, unknown keys
/// are rejected. Errors carry the JSON pointer of the key and the line it
/// appears on. Throws ConfigError.
ToolConfig parse_config(const std::string& text);

/// Reads and parses `path`. Throws ConfigError (also for unreadable files).
ToolConfig load_config(const std::filesystem::path& path);

/// Fully resolved config; parse_config(to_json(c).dump()) reproduces c.
nlohmann::json to_json(const ToolConfig& config);

/// JSON Schema (draft 2020-12) describing every key, its type, range and default.
nlohmann::json config_schema();

/// One line per key with its default, for --help.
std::string config_defaults_help();

/// FNV-1a 64-bit hash of the canonical resolved JSON, as 16 hex digits.
std::string config_hash(const ToolConfig& config);

}  // namespace cbfcert
