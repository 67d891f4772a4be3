#pragma once

#include "cbfcert/bounds.hpp"
#include "cbfcert/config.hpp"
#include "cbfcert/rollout.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace cbfcert {

struct CertificateReport {
  std::vector<GroupStats> groups;
  /// Violation rate pooled over every rollout of every group; absent for zero groups.
  std::optional<double> pooled_violation_rate;
  std::optional<SatisfactionFractions> satisfaction;
  AnalyticBoundInputs analytic_inputs;
  double analytic_delta = 1.0;
  double u_max_observed = 0.0;
  std::size_t total_rollouts = 0;
  std::size_t violated_rollouts = 0;
  std::size_t infeasible_steps = 0;
  double min_distance = 0.0;
  std::string config_hash;
  std::uint64_t base_seed = 0;
};

/// Aggregates finished groups into per-group statistics, satisfaction
/// fractions against the pooled rate and the analytic certificate.
CertificateReport certify(const ToolConfig& config, const std::vector<GroupRecord>& groups);

struct Table1Row {
  double w_bar = 0.0;
  std::size_t n_agents = 0;
  double p_hat = 0.0;
  double eps_B = 0.0;
  double eps_H = 0.0;
  double eps_S = 0.0;
  double B_sat = 0.0;
  double H_sat = 0.0;
  double S_sat = 0.0;
};

/// Averages over groups for one (w_bar, N) cell.
Table1Row table1_row(const CertificateReport& report, double w_bar, std::size_t n_agents);

/// One cell per (w_bar, N) in the configured grids, N-major. Every cell uses
/// the same base seed, so cells share initial states and noise directions.
std::vector<Table1Row> reproduce_table1(const ToolConfig& config, std::size_t jobs);

struct PsiSweepRow {
  double psi = 0.0;
  double p_hat_v = 0.0;
  /// Minimum over rollouts, time and pairs of the inter-agent distance.
  double min_dist = 0.0;
};

/// One group of psi_sweep_rollouts rollouts per psi value, same seeds for every psi.
std::vector<PsiSweepRow> sweep_psi(const ToolConfig& config, std::size_t jobs);

/// Least-squares slope of y against x.
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cbfcert
