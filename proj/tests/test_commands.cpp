#include "cbfcert/commands.hpp"
#include "cbfcert/report.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cbfcert;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("cbfcert_cmd_" + name);
  fs::remove_all(dir);
  return dir;
}

ToolConfig small() {
  ToolConfig c;
  c.experiment.groups = 5;
  c.experiment.rollouts_per_group = 10;
  return c;
}

}  // namespace

TEST_CASE("verify writes the certificate, group table and resolved config") {
  CommandOptions opt;
  opt.out_dir = scratch("verify");
  opt.jobs = 2;
  const auto report = cmd_verify(small(), opt);
  CHECK(report.groups.size() == 5);
  CHECK(report.total_rollouts == 50);

  const auto cert = nlohmann::json::parse(slurp(opt.out_dir / "certificate.json"));
  CHECK(cert["groups"].size() == 5);
  CHECK(cert["config_hash"] == config_hash(small()));
  CHECK(cert["manifest"]["command"] == "verify");
  CHECK(cert["satisfaction"].contains("B_sat"));

  const std::string body = csv_body(slurp(opt.out_dir / "groups.csv"));
  CHECK(body.rfind("group_id,p_hat,sigma2_hat,eps_bernstein,eps_hoeffding,eps_scenario,d_support\n", 0) == 0);
  CHECK(std::count(body.begin(), body.end(), '\n') == 6);
  CHECK(parse_config(slurp(opt.out_dir / "config.resolved.json")).experiment.groups == 5);
}

TEST_CASE("smallest legal run") {
  ToolConfig c;
  c.experiment.groups = 1;
  c.experiment.rollouts_per_group = 2;
  CommandOptions opt;
  opt.out_dir = scratch("minimal");
  const auto report = cmd_verify(c, opt);
  REQUIRE(report.groups.size() == 1);
  CHECK(report.satisfaction.has_value());
  CHECK(std::isfinite(report.groups[0].eps_bernstein));
}

TEST_CASE("trajectory dumps have one file per rollout") {
  ToolConfig c = small();
  c.experiment.groups = 1;
  c.experiment.rollouts_per_group = 3;
  CommandOptions opt;
  opt.out_dir = scratch("traj");
  opt.dump_trajectories = true;
  cmd_verify(c, opt);
  const std::string body = csv_body(slurp(opt.out_dir / "trajectories" / "group0_rollout2.csv"));
  CHECK(body.rfind("t,agent,x0,x1,u0,u1,min_pair_margin\n", 0) == 0);
  // (horizon + 1) time points x 2 agents + header
  CHECK(std::count(body.begin(), body.end(), '\n') == 51 * 2 + 1);
}

TEST_CASE("groups.csv body is identical across runs and job counts") {
  CommandOptions a, b;
  a.out_dir = scratch("det_a");
  b.out_dir = scratch("det_b");
  a.jobs = 1;
  b.jobs = 6;
  cmd_verify(small(), a);
  cmd_verify(small(), b);
  CHECK(csv_body(slurp(a.out_dir / "groups.csv")) == csv_body(slurp(b.out_dir / "groups.csv")));
}

TEST_CASE("sweep commands write their tables") {
  ToolConfig c = small();
  c.table1_noise_bounds = {0.01, 0.05};
  c.table1_agent_counts = {2};
  c.psi_grid = {0.0, 5.0};
  c.psi_sweep_rollouts = 10;
  CommandOptions opt;
  opt.out_dir = scratch("sweeps");
  CHECK(cmd_reproduce_table1(c, opt).size() == 2);
  CHECK(cmd_sweep_psi(c, opt).size() == 2);
  CHECK(csv_body(slurp(opt.out_dir / "table1.csv")).rfind("w_bar,N,p_hat,eps_B,eps_H,eps_S,B_sat,H_sat,S_sat\n", 0) ==
        0);
  CHECK(csv_body(slurp(opt.out_dir / "psi_sweep.csv")).rfind("psi,p_hat_v,min_dist\n", 0) == 0);
}

TEST_CASE("csv numbers use six significant digits") {
  CHECK(csv_number(0.1730818) == "0.173082");
  CHECK(csv_number(0.0) == "0");
  CHECK(csv_number(12345678.0) == "1.23457e+07");
}
