#pragma once

#include "cbfcert/config.hpp"
#include "cbfcert/experiment.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace cbfcert {

struct CommandOptions {
  std::string config_path;  // empty: built-in defaults
  std::filesystem::path out_dir = "out";
  std::size_t jobs = 1;
  bool dump_trajectories = false;
};

/// Runs every group, writes certificate.json, groups.csv and
/// config.resolved.json (plus trajectories/ when requested).
CertificateReport cmd_verify(const ToolConfig& config, const CommandOptions& options);

/// Writes table1.csv.
std::vector<Table1Row> cmd_reproduce_table1(const ToolConfig& config, const CommandOptions& options);

/// Writes psi_sweep.csv.
std::vector<PsiSweepRow> cmd_sweep_psi(const ToolConfig& config, const CommandOptions& options);

}  // namespace cbfcert
