#include "cbfcert/experiment.hpp"

#include "cbfcert/errors.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace cbfcert {

CertificateReport certify(const ToolConfig& config, const std::vector<GroupRecord>& groups) {
  const ExperimentConfig& exp = config.experiment;
  CertificateReport report;
  report.config_hash = config_hash(config);
  report.base_seed = exp.base_seed;
  report.min_distance = std::numeric_limits<double>::infinity();

  std::size_t flagged = 0;
  for (const auto& g : groups) {
    report.groups.push_back(group_stats(g.x_flags, g.z_scores, exp.delta, exp.tol_support));
    flagged += static_cast<std::size_t>(std::count(g.x_flags.begin(), g.x_flags.end(), 1));
    for (const auto& r : g.rollouts) {
      ++report.total_rollouts;
      report.violated_rollouts += r.violated;
      report.infeasible_steps += r.infeasible_steps;
      report.u_max_observed = std::max(report.u_max_observed, r.max_control_norm);
      report.min_distance = std::min(report.min_distance, r.min_distance);
    }
  }
  if (report.total_rollouts > 0) {
    report.pooled_violation_rate = static_cast<double>(flagged) / static_cast<double>(report.total_rollouts);
    report.satisfaction = satisfaction_stats(report.groups, *report.pooled_violation_rate);
  } else {
    report.min_distance = 0.0;
  }

  const SystemConfig& sys = exp.system;
  const double sup_grad = sup_grad_h(sys.domain_half_width, sys.position_dim());
  report.analytic_inputs.h_min = exp.h_min;
  report.analytic_inputs.K = sys.horizon_steps;
  report.analytic_inputs.sigma2_step = step_variance(sys.noise_bound, sup_grad, sys.dt);
  report.analytic_inputs.c_increment = increment_bound(sys.dt, sup_grad, report.u_max_observed, sys.noise_bound);
  report.analytic_inputs.n_pairs = sys.n_agents * (sys.n_agents - 1) / 2;
  report.analytic_delta = analytic_delta(report.analytic_inputs);
  return report;
}

Table1Row table1_row(const CertificateReport& report, double w_bar, std::size_t n_agents) {
  Table1Row row;
  row.w_bar = w_bar;
  row.n_agents = n_agents;
  if (report.groups.empty()) return row;
  for (const auto& g : report.groups) {
    row.p_hat += g.p_hat;
    row.eps_B += g.eps_bernstein;
    row.eps_H += g.eps_hoeffding;
    row.eps_S += g.eps_scenario;
  }
  const auto n = static_cast<double>(report.groups.size());
  row.p_hat /= n;
  row.eps_B /= n;
  row.eps_H /= n;
  row.eps_S /= n;
  row.B_sat = report.satisfaction->bernstein;
  row.H_sat = report.satisfaction->hoeffding;
  row.S_sat = report.satisfaction->scenario;
  return row;
}

std::vector<Table1Row> reproduce_table1(const ToolConfig& config, std::size_t jobs) {
  std::vector<Table1Row> rows;
  for (const std::size_t n : config.table1_agent_counts) {
    for (const double w : config.table1_noise_bounds) {
      ToolConfig cell = config;
      cell.experiment.system.n_agents = n;
      cell.experiment.system.noise_bound = w;
      cell.validate();
      const auto groups = run_groups(cell.experiment, jobs);
      rows.push_back(table1_row(certify(cell, groups), w, n));
    }
  }
  return rows;
}

std::vector<PsiSweepRow> sweep_psi(const ToolConfig& config, std::size_t jobs) {
  std::vector<PsiSweepRow> rows;
  for (const double psi : config.psi_grid) {
    ToolConfig cell = config;
    cell.experiment.safety.psi = psi;
    cell.experiment.groups = 1;
    cell.experiment.rollouts_per_group = config.psi_sweep_rollouts;
    cell.validate();
    const GroupRecord g = run_group(cell.experiment, 0, jobs);
    PsiSweepRow row;
    row.psi = psi;
    row.p_hat_v = empirical_mean(g.x_flags);
    row.min_dist = std::numeric_limits<double>::infinity();
    for (const auto& r : g.rollouts) row.min_dist = std::min(row.min_dist, r.min_distance);
    rows.push_back(row);
  }
  return rows;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("least_squares_slope: need >= 2 paired points");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  if (sxx == 0.0) throw InputError("least_squares_slope: x values are all equal");
  return sxy / sxx;
}

}  // namespace cbfcert
