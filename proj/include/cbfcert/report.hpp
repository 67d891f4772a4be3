#pragma once

#include "cbfcert/config.hpp"
#include "cbfcert/experiment.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace cbfcert {

struct RunManifest {
  std::string command;
  std::string config_path;
  nlohmann::json resolved_config;
  std::string config_hash;
  std::uint64_t base_seed = 0;
  std::string tool_version = CBFCERT_VERSION;
  std::string utc_timestamp;
  std::string output_dir;

  static RunManifest make(std::string command, std::string config_path, const ToolConfig& config,
                          std::string output_dir);
  nlohmann::json to_json() const;
};

std::string utc_timestamp_now();

/// Six significant digits, as every CSV numeric is written.
std::string csv_number(double v);

/// Comment lines ("# key=value") that precede the CSV header row.
std::string provenance_header(const RunManifest& manifest);

void write_groups_csv(const std::filesystem::path& path, const CertificateReport& report, const RunManifest& manifest);
void write_certificate_json(const std::filesystem::path& path, const CertificateReport& report,
                            const RunManifest& manifest, double delta);
void write_table1_csv(const std::filesystem::path& path, const std::vector<Table1Row>& rows,
                      const RunManifest& manifest);
void write_psi_sweep_csv(const std::filesystem::path& path, const std::vector<PsiSweepRow>& rows,
                         const RunManifest& manifest);
/// Columns t, agent, x0..x{n-1}, u0..u{m-1}, min_pair_margin; one row per agent per time point.
void write_trajectory_csv(const std::filesystem::path& path, const RolloutRecord& rollout,
                          const RunManifest& manifest);

/// CSV text with the '#' provenance lines removed.
std::string csv_body(const std::string& text);

}  // namespace cbfcert
