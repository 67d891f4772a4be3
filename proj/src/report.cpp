#include "cbfcert/report.hpp"

#include "cbfcert/errors.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace cbfcert {

using nlohmann::json;

std::string utc_timestamp_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest RunManifest::make(std::string command, std::string config_path, const ToolConfig& config,
                              std::string output_dir) {
  RunManifest m;
  m.command = std::move(command);
  m.config_path = std::move(config_path);
  m.resolved_config = cbfcert::to_json(config);
  m.config_hash = cbfcert::config_hash(config);
  m.base_seed = config.experiment.base_seed;
  m.utc_timestamp = utc_timestamp_now();
  m.output_dir = std::move(output_dir);
  return m;
}

json RunManifest::to_json() const {
  return json{{"command", command},     {"config_path", config_path},   {"config", resolved_config},
              {"config_hash", config_hash}, {"base_seed", base_seed},   {"tool_version", tool_version},
              {"utc_timestamp", utc_timestamp}, {"output_dir", output_dir}};
}

std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string provenance_header(const RunManifest& m) {
  std::ostringstream os;
  os << "# tool=cbfcert " << m.tool_version << "\n"
     << "# command=" << m.command << "\n"
     << "# config_hash=" << m.config_hash << "\n"
     << "# base_seed=" << m.base_seed << "\n"
     << "# utc_timestamp=" << m.utc_timestamp << "\n";
  return os.str();
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SetupError("cannot open output file " + path.string());
  return out;
}

json fractions_json(const std::optional<SatisfactionFractions>& s) {
  if (!s) return nullptr;
  return json{{"B_sat", s->bernstein}, {"H_sat", s->hoeffding}, {"S_sat", s->scenario}};
}

}  // namespace

void write_groups_csv(const std::filesystem::path& path, const CertificateReport& report, const RunManifest& manifest) {
  auto out = open_output(path);
  out << provenance_header(manifest);
  out << "group_id,p_hat,sigma2_hat,eps_bernstein,eps_hoeffding,eps_scenario,d_support\n";
  for (std::size_t g = 0; g < report.groups.size(); ++g) {
    const auto& s = report.groups[g];
    out << g << ',' << csv_number(s.p_hat) << ',' << csv_number(s.sigma2_hat) << ',' << csv_number(s.eps_bernstein)
        << ',' << csv_number(s.eps_hoeffding) << ',' << csv_number(s.eps_scenario) << ',' << s.d_support << '\n';
  }
}

void write_certificate_json(const std::filesystem::path& path, const CertificateReport& report,
                            const RunManifest& manifest, double delta) {
  json groups = json::array();
  for (std::size_t g = 0; g < report.groups.size(); ++g) {
    const auto& s = report.groups[g];
    groups.push_back({{"group_id", g},
                      {"p_hat", s.p_hat},
                      {"sigma2_hat", s.sigma2_hat},
                      {"eps_bernstein", s.eps_bernstein},
                      {"eps_hoeffding", s.eps_hoeffding},
                      {"eps_scenario", s.eps_scenario},
                      {"d_support", s.d_support},
                      {"bernstein_bound", s.bernstein_full()}});
  }
  const auto& in = report.analytic_inputs;
  json doc{
      {"manifest", manifest.to_json()},
      {"config_hash", report.config_hash},
      {"base_seed", report.base_seed},
      {"delta", delta},
      {"pooled_violation_rate", report.pooled_violation_rate ? json(*report.pooled_violation_rate) : json(nullptr)},
      {"satisfaction", fractions_json(report.satisfaction)},
      {"analytic",
       {{"delta", report.analytic_delta},
        {"h_min", in.h_min},
        {"K", in.K},
        {"sigma2_step", in.sigma2_step},
        {"c_increment", in.c_increment},
        {"n_pairs", in.n_pairs},
        {"u_max_observed", report.u_max_observed}}},
      {"totals",
       {{"rollouts", report.total_rollouts},
        {"violated_rollouts", report.violated_rollouts},
        {"infeasible_steps", report.infeasible_steps},
        {"min_distance", report.min_distance}}},
      {"groups", std::move(groups)},
  };
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

void write_table1_csv(const std::filesystem::path& path, const std::vector<Table1Row>& rows,
                      const RunManifest& manifest) {
  auto out = open_output(path);
  out << provenance_header(manifest);
  out << "w_bar,N,p_hat,eps_B,eps_H,eps_S,B_sat,H_sat,S_sat\n";
  for (const auto& r : rows) {
    out << csv_number(r.w_bar) << ',' << r.n_agents << ',' << csv_number(r.p_hat) << ',' << csv_number(r.eps_B)
        << ',' << csv_number(r.eps_H) << ',' << csv_number(r.eps_S) << ',' << csv_number(r.B_sat) << ','
        << csv_number(r.H_sat) << ',' << csv_number(r.S_sat) << '\n';
  }
}

void write_psi_sweep_csv(const std::filesystem::path& path, const std::vector<PsiSweepRow>& rows,
                         const RunManifest& manifest) {
  auto out = open_output(path);
  out << provenance_header(manifest);
  out << "psi,p_hat_v,min_dist\n";
  for (const auto& r : rows) out << csv_number(r.psi) << ',' << csv_number(r.p_hat_v) << ',' << csv_number(r.min_dist) << '\n';
}

void write_trajectory_csv(const std::filesystem::path& path, const RolloutRecord& rollout,
                          const RunManifest& manifest) {
  auto out = open_output(path);
  out << provenance_header(manifest);
  out << "# seed=" << rollout.seed << "\n";
  if (rollout.trajectory.empty()) return;
  const auto n = rollout.trajectory.front().x.cols();
  const auto m = rollout.trajectory.front().u.cols();
  out << "t,agent";
  for (Eigen::Index k = 0; k < n; ++k) out << ",x" << k;
  for (Eigen::Index k = 0; k < m; ++k) out << ",u" << k;
  out << ",min_pair_margin\n";
  for (const auto& pt : rollout.trajectory) {
    for (Eigen::Index i = 0; i < pt.x.rows(); ++i) {
      out << csv_number(pt.t) << ',' << i;
      for (Eigen::Index k = 0; k < n; ++k) out << ',' << csv_number(pt.x(i, k));
      for (Eigen::Index k = 0; k < m; ++k) out << ',' << csv_number(pt.u(i, k));
      out << ',' << csv_number(pt.min_pair_margin) << '\n';
    }
  }
}

std::string csv_body(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  for (std::string line; std::getline(in, line);)
    if (line.empty() || line.front() != '#') out << line << '\n';
  return out.str();
}

}  // namespace cbfcert
