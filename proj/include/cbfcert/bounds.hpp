#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cbfcert {

/// Mean of a binary sequence. Throws InputError if empty or non-binary.
double empirical_mean(std::span<const std::uint8_t> x_flags);

/// (1 / (P (P - 1))) sum_{i<j} (X_i - X_j)^2, evaluated in O(P) as
/// k (P - k) / (P (P - 1)) for k ones. Equals the unbiased sample variance.
/// Throws InputError if P < 2 or non-binary.
double pairwise_variance(std::span<const std::uint8_t> x_flags);

/// sqrt(2 sigma2 ln(2/delta) / P) + 7 ln(2/delta) / (3 (P - 1)).
double bernstein_slack(double sigma2_hat, std::size_t P, double delta);

/// Empirical Bernstein upper bound on the violation probability: p_hat + slack.
double bernstein_bound(double p_hat, double sigma2_hat, std::size_t P, double delta);

/// sqrt(ln(2/delta) / (2P)).
double hoeffding_bound(std::size_t P, double delta);

/// (d + ln(1/delta)) / P. Values above 1 are returned unchanged.
double scenario_bound(std::size_t d_support, std::size_t P, double delta);

/// Number of scores within tol_support of the minimum, minus one.
std::size_t count_support(std::span<const double> z_scores, double tol_support);

struct GroupStats {
  double p_hat = 0.0;
  double sigma2_hat = 0.0;
  double eps_bernstein = 0.0;
  double eps_hoeffding = 0.0;
  double eps_scenario = 0.0;
  std::size_t d_support = 0;

  double bernstein_full() const { return p_hat + eps_bernstein; }
};

GroupStats group_stats(std::span<const std::uint8_t> x_flags, std::span<const double> z_scores, double delta,
                       double tol_support);

struct SatisfactionFractions {
  double bernstein = 0.0;
  double hoeffding = 0.0;
  double scenario = 0.0;
};

/// A bound family is satisfied in group k when p_star <= p_hat_k + eps_k.
/// Throws InputError for an empty group list.
SatisfactionFractions satisfaction_stats(std::span<const GroupStats> groups, double p_star);

struct AnalyticBoundInputs {
  double h_min = 0.0;
  std::size_t K = 1;
  double sigma2_step = 0.0;
  double c_increment = 0.0;
  std::size_t n_pairs = 1;
};

/// min(1, n_pairs * exp(-h_min^2 / (2 K sigma2 + (2/3) c h_min))); 1 when h_min = 0.
double analytic_delta(const AnalyticBoundInputs& inputs);

/// sup |grad h| over a cube of side L in `position_dim` dimensions: 2 L sqrt(d).
double sup_grad_h(double side_length, std::size_t position_dim);

/// Per-step increment variance 4 w_bar^2 sup|grad h|^2 dt^2.
double step_variance(double w_bar, double sup_grad, double dt);

/// Heuristic per-step increment bound dt * sup|grad h| * (2 u_max + 2 w_bar).
double increment_bound(double dt, double sup_grad, double u_max, double w_bar);

}  // namespace cbfcert
