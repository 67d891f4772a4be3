#include "cbfcert/bounds.hpp"

#include "cbfcert/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cbfcert {

namespace {

std::size_t count_ones(std::span<const std::uint8_t> x_flags) {
  std::size_t ones = 0;
  for (auto v : x_flags) {
    if (v > 1) throw InputError("expected binary indicators");
    ones += v;
  }
  return ones;
}

}  // namespace

double empirical_mean(std::span<const std::uint8_t> x_flags) {
  if (x_flags.empty()) throw InputError("empirical_mean: empty sequence");
  return static_cast<double>(count_ones(x_flags)) / static_cast<double>(x_flags.size());
}

double pairwise_variance(std::span<const std::uint8_t> x_flags) {
  const std::size_t P = x_flags.size();
  if (P < 2) throw InputError("pairwise_variance: need at least two samples");
  const auto k = static_cast<double>(count_ones(x_flags));
  const auto p = static_cast<double>(P);
  // Each discordant (one, zero) pair contributes exactly 1.
  return k * (p - k) / (p * (p - 1.0));
}

double bernstein_slack(double sigma2_hat, std::size_t P, double delta) {
  const double log_term = std::log(2.0 / delta);
  const auto p = static_cast<double>(P);
  return std::sqrt(2.0 * sigma2_hat * log_term / p) + 7.0 * log_term / (3.0 * (p - 1.0));
}

double bernstein_bound(double p_hat, double sigma2_hat, std::size_t P, double delta) {
  return p_hat + bernstein_slack(sigma2_hat, P, delta);
}

double hoeffding_bound(std::size_t P, double delta) {
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(P)));
}

double scenario_bound(std::size_t d_support, std::size_t P, double delta) {
  return (static_cast<double>(d_support) + std::log(1.0 / delta)) / static_cast<double>(P);
}

std::size_t count_support(std::span<const double> z_scores, double tol_support) {
  if (z_scores.empty()) throw InputError("count_support: empty sequence");
  const double lo = *std::min_element(z_scores.begin(), z_scores.end());
  const auto tied = std::count_if(z_scores.begin(), z_scores.end(), [&](double z) { return z - lo <= tol_support; });
  return static_cast<std::size_t>(tied) - 1;
}

GroupStats group_stats(std::span<const std::uint8_t> x_flags, std::span<const double> z_scores, double delta,
                       double tol_support) {
  GroupStats s;
  const std::size_t P = x_flags.size();
  s.p_hat = empirical_mean(x_flags);
  s.sigma2_hat = pairwise_variance(x_flags);
  s.eps_bernstein = bernstein_slack(s.sigma2_hat, P, delta);
  s.eps_hoeffding = hoeffding_bound(P, delta);
  s.d_support = count_support(z_scores, tol_support);
  s.eps_scenario = scenario_bound(s.d_support, P, delta);
  return s;
}

SatisfactionFractions satisfaction_stats(std::span<const GroupStats> groups, double p_star) {
  if (groups.empty()) throw InputError("satisfaction_stats: no groups");
  std::size_t b = 0, h = 0, s = 0;
  for (const auto& g : groups) {
    b += p_star <= g.p_hat + g.eps_bernstein;
    h += p_star <= g.p_hat + g.eps_hoeffding;
    s += p_star <= g.p_hat + g.eps_scenario;
  }
  const auto n = static_cast<double>(groups.size());
  return {static_cast<double>(b) / n, static_cast<double>(h) / n, static_cast<double>(s) / n};
}

double analytic_delta(const AnalyticBoundInputs& in) {
  if (in.h_min < 0.0 || in.sigma2_step < 0.0 || in.c_increment < 0.0 || in.K < 1)
    throw InputError("analytic_delta: inputs must be non-negative with K >= 1");
  if (in.h_min == 0.0) return 1.0;
  const double denom = 2.0 * static_cast<double>(in.K) * in.sigma2_step + (2.0 / 3.0) * in.c_increment * in.h_min;
  const double per_pair = std::exp(-in.h_min * in.h_min / denom);
  return std::min(1.0, static_cast<double>(in.n_pairs) * per_pair);
}

double sup_grad_h(double side_length, std::size_t position_dim) {
  return 2.0 * side_length * std::sqrt(static_cast<double>(position_dim));
}

double step_variance(double w_bar, double sup_grad, double dt) {
  return 4.0 * w_bar * w_bar * sup_grad * sup_grad * dt * dt;
}

double increment_bound(double dt, double sup_grad, double u_max, double w_bar) {
  return dt * sup_grad * (2.0 * u_max + 2.0 * w_bar);
}

}  // namespace cbfcert
