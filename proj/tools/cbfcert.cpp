// cbfcert: Monte Carlo safety certificates for psi-weighted CBF multi-agent controllers.
//
//   cbfcert verify            --config cfg.json --out DIR
//   cbfcert reproduce-table1  --config cfg.json --out DIR
//   cbfcert sweep-psi         --config cfg.json --out DIR
//   cbfcert print-config-schema
//
// Exit codes: 0 success, 2 config error, 3 runtime setup error, 4 internal solver failure.

#include "cbfcert/commands.hpp"
#include "cbfcert/errors.hpp"
#include "cbfcert/report.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <thread>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSetup = 3;
constexpr int kExitSolver = 4;

void print_table1(const std::vector<cbfcert::Table1Row>& rows) {
  std::cout << "  w_bar  N   p_hat   eps_B   eps_H   eps_S   B_sat  H_sat  S_sat\n" << std::fixed;
  for (const auto& r : rows) {
    std::cout << std::setprecision(2) << "  " << r.w_bar << "   " << r.n_agents << std::setprecision(3) << "   "
              << r.p_hat << "   " << r.eps_B << "   " << r.eps_H << "   " << r.eps_S << std::setprecision(2) << "   "
              << r.B_sat << "   " << r.H_sat << "   " << r.S_sat << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cbfcert: distribution-free safety certificates for psi-weighted CBF multi-agent control"};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer("Config keys (JSON object, all optional):\n" + cbfcert::config_defaults_help());

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  bool dump_trajectories = false;

  app.add_option("--config", config_path, "JSON config file (defaults when omitted)");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", seed, "override base_seed");
  app.add_option("--jobs", jobs, "worker threads; results do not depend on it")->capture_default_str()->check(
      CLI::PositiveNumber);
  app.add_flag("--dump-trajectories", dump_trajectories, "write one CSV per rollout (verify only)");

  auto* verify = app.add_subcommand("verify", "run all groups and write certificate.json and groups.csv");
  auto* table1 = app.add_subcommand("reproduce-table1", "sweep noise bound x agent count and write table1.csv");
  auto* sweep = app.add_subcommand("sweep-psi", "sweep psi and write psi_sweep.csv");
  auto* schema = app.add_subcommand("print-config-schema", "print the config JSON schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (schema->parsed()) {
      std::cout << cbfcert::config_schema().dump(2) << "\n";
      return 0;
    }

    cbfcert::ToolConfig config = config_path.empty() ? cbfcert::ToolConfig{} : cbfcert::load_config(config_path);
    if (seed) config.experiment.base_seed = *seed;
    config.validate();

    cbfcert::CommandOptions options;
    options.config_path = config_path;
    options.out_dir = out_dir;
    options.jobs = jobs;
    options.dump_trajectories = dump_trajectories;

    if (verify->parsed()) {
      const auto report = cbfcert::cmd_verify(config, options);
      std::cout << "groups: " << report.groups.size() << ", rollouts: " << report.total_rollouts
                << ", config hash " << report.config_hash << "\n";
      if (report.satisfaction) {
        std::cout << "pooled violation rate p* = " << *report.pooled_violation_rate
                  << "\nB_sat = " << report.satisfaction->bernstein << "  H_sat = " << report.satisfaction->hoeffding
                  << "  S_sat = " << report.satisfaction->scenario << "\n";
      }
      std::cout << "analytic delta = " << report.analytic_delta << "\nwrote " << out_dir << "/certificate.json, "
                << out_dir << "/groups.csv\n";
    } else if (table1->parsed()) {
      print_table1(cbfcert::cmd_reproduce_table1(config, options));
      std::cout << "wrote " << out_dir << "/table1.csv\n";
    } else if (sweep->parsed()) {
      for (const auto& r : cbfcert::cmd_sweep_psi(config, options))
        std::cout << "psi = " << r.psi << "  p_hat_v = " << r.p_hat_v << "  min_dist = " << r.min_dist << "\n";
      std::cout << "wrote " << out_dir << "/psi_sweep.csv\n";
    }
    return 0;
  } catch (const cbfcert::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const cbfcert::SetupError& e) {
    std::cerr << "setup error: " << e.what() << "\n";
    return kExitSetup;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what()
              << "\nThis should not happen; please file a bug report with the config and seed.\n";
    return kExitSolver;
  }
}
