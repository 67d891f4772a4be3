#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace cbfcert {

using VecRef = Eigen::Ref<const Eigen::VectorXd>;

struct SafetyParams {
  double psi = 2.0;
  double reg_eps = 1e-6;
  double d_min = 1.0;
  double kappa = 1.0;
  bool robust_margin_enabled = true;

  void validate() const;
};

/// Separation barrier h_ij = |x_i - x_j|^2 - d_min^2.
double h_pair(const VecRef& x_i, const VecRef& x_j, const SafetyParams& params);

/// Gradient of h_pair with respect to x_i; the gradient w.r.t. x_j is its negation.
Eigen::VectorXd grad_h_pair(const VecRef& x_i, const VecRef& x_j, const SafetyParams& params);

/// Propagation vector A_ij = dx / sqrt(|dx|^2 + eps^2) * exp(-|dx|^2), dx = x_i - x_j.
/// Odd in dx, finite everywhere, |A_ij| <= exp(-|dx|^2) <= 1.
Eigen::VectorXd propagation_vector(const VecRef& x_i, const VecRef& x_j, const SafetyParams& params);

/// Jacobian dA_ij / d(x_i - x_j).
Eigen::MatrixXd propagation_jacobian(const VecRef& x_i, const VecRef& x_j, const SafetyParams& params);

/// psi-weighted margin h_ij + psi * A_ij^T (u_i - u_j). When the control
/// space is smaller than the state space (double integrator) only the leading
/// (position) components of A_ij couple to the control difference.
double psi_safety(const VecRef& x_i, const VecRef& x_j, const VecRef& u_i, const VecRef& u_j,
                  const SafetyParams& params);

/// Closed-form sup over |w_i|, |w_j| <= w_bar of |grad h^T (w_i - w_j)|, i.e. 2 w_bar |grad h|.
double disturbance_margin(const VecRef& x_i, const VecRef& x_j, double w_bar, const SafetyParams& params);

/// Linear extended class-K function kappa * s.
double class_k(double s, const SafetyParams& params);

/// Everything the controller and the monitors need about one unordered pair.
/// Stored once with i < j; `grad_h` and `A` are oriented as (x_i - x_j).
struct PairMargin {
  std::size_t i = 0;
  std::size_t j = 0;
  double h = 0.0;
  double h_tilde = 0.0;
  Eigen::VectorXd grad_h;
  Eigen::VectorXd A;
  double gamma = 0.0;

  /// Sign of the stored direction as seen from `agent` (which must be i or j).
  double orientation(std::size_t agent) const { return agent == i ? 1.0 : -1.0; }
  Eigen::VectorXd grad_h_from(std::size_t agent) const { return orientation(agent) * grad_h; }
  Eigen::VectorXd A_from(std::size_t agent) const { return orientation(agent) * A; }
};

PairMargin pair_margin(std::size_t i, std::size_t j, const VecRef& x_i, const VecRef& x_j,
                       const VecRef& u_i, const VecRef& u_j, double w_bar, const SafetyParams& params);

}  // namespace cbfcert
