#include "cbfcert/commands.hpp"

#include "cbfcert/errors.hpp"
#include "cbfcert/report.hpp"

#include <fstream>
#include <string>

namespace cbfcert {

namespace {

void write_resolved_config(const std::filesystem::path& dir, const ToolConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream out(dir / "config.resolved.json");
  if (!out) throw SetupError("cannot write to output directory " + dir.string());
  out << to_json(config).dump(2) << '\n';
}

}  // namespace

CertificateReport cmd_verify(const ToolConfig& config, const CommandOptions& options) {
  config.validate();
  ToolConfig run = config;
  run.experiment.store_trajectories = options.dump_trajectories;
  const auto groups = run_groups(run.experiment, options.jobs);
  const CertificateReport report = certify(config, groups);

  const RunManifest manifest = RunManifest::make("verify", options.config_path, config, options.out_dir.string());
  write_resolved_config(options.out_dir, config);
  write_certificate_json(options.out_dir / "certificate.json", report, manifest, config.experiment.delta);
  write_groups_csv(options.out_dir / "groups.csv", report, manifest);
  if (options.dump_trajectories) {
    for (const auto& g : groups)
      for (std::size_t p = 0; p < g.rollouts.size(); ++p)
        write_trajectory_csv(options.out_dir / "trajectories" /
                                 ("group" + std::to_string(g.group_index) + "_rollout" + std::to_string(p) + ".csv"),
                             g.rollouts[p], manifest);
  }
  return report;
}

std::vector<Table1Row> cmd_reproduce_table1(const ToolConfig& config, const CommandOptions& options) {
  config.validate();
  const auto rows = reproduce_table1(config, options.jobs);
  const RunManifest manifest =
      RunManifest::make("reproduce-table1", options.config_path, config, options.out_dir.string());
  write_resolved_config(options.out_dir, config);
  write_table1_csv(options.out_dir / "table1.csv", rows, manifest);
  return rows;
}

std::vector<PsiSweepRow> cmd_sweep_psi(const ToolConfig& config, const CommandOptions& options) {
  config.validate();
  const auto rows = sweep_psi(config, options.jobs);
  const RunManifest manifest = RunManifest::make("sweep-psi", options.config_path, config, options.out_dir.string());
  write_resolved_config(options.out_dir, config);
  write_psi_sweep_csv(options.out_dir / "psi_sweep.csv", rows, manifest);
  return rows;
}

}  // namespace cbfcert
