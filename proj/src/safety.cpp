#include "cbfcert/safety.hpp"

#include "cbfcert/errors.hpp"

#include <cmath>

namespace cbfcert {

void SafetyParams::validate() const {
  if (!(std::isfinite(psi) && psi >= 0.0)) throw ConfigError("psi must be finite and >= 0");
  if (!(std::isfinite(reg_eps) && reg_eps > 0.0)) throw ConfigError("reg_eps must be finite and > 0");
  if (!(std::isfinite(d_min) && d_min > 0.0)) throw ConfigError("d_min must be finite and > 0");
  if (!(std::isfinite(kappa) && kappa > 0.0)) throw ConfigError("kappa must be finite and > 0");
}

double h_pair(const VecRef& x_i, const VecRef& x_j, const SafetyParams& params) {
  return (x_i - x_j).squaredNorm() - params.d_min * params.d_min;
}

Eigen::VectorXd grad_h_pair(const VecRef& x_i, const VecRef& x_j, const SafetyParams& /*params*/) {
  return 2.0 * (x_i - x_j);
}

namespace {

// Scalar factor s(q) = exp(-q) / sqrt(q + eps^2), with q = |dx|^2, so that A = s * dx.
double propagation_scale(double q, double eps) { return std::exp(-q) / std::sqrt(q + eps * eps); }

}  // namespace

Eigen::VectorXd propagation_vector(const VecRef& x_i, const VecRef& x_j, const SafetyParams& params) {
  const Eigen::VectorXd dx = x_i - x_j;
  return propagation_scale(dx.squaredNorm(), params.reg_eps) * dx;
}

Eigen::MatrixXd propagation_jacobian(const VecRef& x_i, const VecRef& x_j, const SafetyParams& params) {
  const Eigen::VectorXd dx = x_i - x_j;
  const double q = dx.squaredNorm();
  const double r2 = q + params.reg_eps * params.reg_eps;
  const double s = propagation_scale(q, params.reg_eps);
  // ds/d(dx) = -2 s (1 + 1 / (2 r2)) dx
  const auto n = dx.size();
  return s * (Eigen::MatrixXd::Identity(n, n) - (2.0 + 1.0 / r2) * dx * dx.transpose());
}

double psi_safety(const VecRef& x_i, const VecRef& x_j, const VecRef& u_i, const VecRef& u_j,
                  const SafetyParams& params) {
  const double h = h_pair(x_i, x_j, params);
  if (params.psi == 0.0) return h;
  const Eigen::VectorXd du = u_i - u_j;
  return h + params.psi * propagation_vector(x_i, x_j, params).head(du.size()).dot(du);
}

double disturbance_margin(const VecRef& x_i, const VecRef& x_j, double w_bar, const SafetyParams& params) {
  return 2.0 * w_bar * grad_h_pair(x_i, x_j, params).norm();
}

double class_k(double s, const SafetyParams& params) { return params.kappa * s; }

PairMargin pair_margin(std::size_t i, std::size_t j, const VecRef& x_i, const VecRef& x_j,
                       const VecRef& u_i, const VecRef& u_j, double w_bar, const SafetyParams& params) {
  PairMargin pm;
  pm.i = i;
  pm.j = j;
  pm.h = h_pair(x_i, x_j, params);
  pm.grad_h = grad_h_pair(x_i, x_j, params);
  pm.A = propagation_vector(x_i, x_j, params);
  const Eigen::VectorXd du = u_i - u_j;
  pm.h_tilde = pm.h + params.psi * pm.A.head(du.size()).dot(du);
  pm.gamma = params.robust_margin_enabled ? 2.0 * w_bar * pm.grad_h.norm() : 0.0;
  return pm;
}

}  // namespace cbfcert
