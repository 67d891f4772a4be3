#include "cbfcert/controller.hpp"

#include "cbfcert/errors.hpp"

#include <cmath>

namespace cbfcert {

void ControllerOptions::validate() const {
  if (!(std::isfinite(control_bound) && control_bound >= 0.0))
    throw ConfigError("control_bound must be finite and >= 0");
  if (!(std::isfinite(qp.tol) && qp.tol > 0.0)) throw ConfigError("qp tol must be > 0");
  if (!(std::isfinite(qp.tol_active) && qp.tol_active > 0.0)) throw ConfigError("qp tol_active must be > 0");
  if (!(std::isfinite(qp.relax_rho) && qp.relax_rho > 0.0)) throw ConfigError("relax_rho must be > 0");
}

Eigen::VectorXd flatten(const ControlVector& u) {
  const Eigen::MatrixXd& m = u.u();
  Eigen::VectorXd flat(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) flat.segment(i * m.cols(), m.cols()) = m.row(i).transpose();
  return flat;
}

ControlVector unflatten(const Eigen::VectorXd& u, std::size_t n_agents, std::size_t control_dim) {
  const auto rows = static_cast<Eigen::Index>(n_agents);
  const auto cols = static_cast<Eigen::Index>(control_dim);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) m.row(i) = u.segment(i * cols, cols).transpose();
  return ControlVector(std::move(m));
}

QPProblem assemble_constraints(const SystemModel& model, const SystemState& state, const ControlVector& u_prev,
                               const SafetyParams& params, double w_bar, const ControllerOptions& options) {
  const SystemConfig& cfg = model.config();
  const std::size_t n_agents = cfg.n_agents;
  const auto m = static_cast<Eigen::Index>(cfg.control_dim);
  if (state.n_agents() != n_agents || state.state_dim() != cfg.state_dim)
    throw ConfigError("assemble_constraints: state does not match the system configuration");

  QPProblem qp;
  qp.dim = n_agents * cfg.control_dim;
  const std::size_t n_pairs = n_agents * (n_agents - 1) / 2;
  qp.constraints.reserve(n_pairs);
  qp.labels.reserve(n_pairs);

  Eigen::MatrixXd prev_velocity;
  if (options.freeze_adot && params.psi != 0.0) prev_velocity = model.nominal_velocity(state, u_prev);

  for (std::size_t i = 0; i < n_agents; ++i) {
    const Eigen::VectorXd x_i = state.agent(i);
    for (std::size_t j = i + 1; j < n_agents; ++j) {
      const Eigen::VectorXd x_j = state.agent(j);
      const double h = h_pair(x_i, x_j, params);
      const Eigen::VectorXd grad = grad_h_pair(x_i, x_j, params);
      const Eigen::VectorXd coupling = params.psi * params.kappa * propagation_vector(x_i, x_j, params).head(m);

      LinearConstraint c;
      c.a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(qp.dim));
      c.a.segment(static_cast<Eigen::Index>(i) * m, m) = model.actuation(state, i).transpose() * grad + coupling;
      c.a.segment(static_cast<Eigen::Index>(j) * m, m) = -(model.actuation(state, j).transpose() * grad + coupling);

      const double gamma = params.robust_margin_enabled ? disturbance_margin(x_i, x_j, w_bar, params) : 0.0;
      c.b = gamma - grad.dot(model.drift(state, i) - model.drift(state, j)) - class_k(h, params);

      if (prev_velocity.size() > 0) {
        const Eigen::VectorXd rel_velocity =
            (prev_velocity.row(static_cast<Eigen::Index>(i)) - prev_velocity.row(static_cast<Eigen::Index>(j)))
                .transpose();
        const Eigen::VectorXd a_dot = propagation_jacobian(x_i, x_j, params) * rel_velocity;
        c.b -= params.psi * a_dot.head(m).dot(u_prev.agent(i) - u_prev.agent(j));
      }

      qp.constraints.push_back(std::move(c));
      qp.labels.push_back({ConstraintLabel::Kind::pair, i, j});
    }
  }

  if (options.control_bound > 0.0) {
    for (std::size_t k = 0; k < qp.dim; ++k) {
      LinearConstraint upper{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(qp.dim)), -options.control_bound};
      upper.a(static_cast<Eigen::Index>(k)) = -1.0;
      LinearConstraint lower{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(qp.dim)), -options.control_bound};
      lower.a(static_cast<Eigen::Index>(k)) = 1.0;
      qp.constraints.push_back(std::move(upper));
      qp.labels.push_back({ConstraintLabel::Kind::box_upper, k, k});
      qp.constraints.push_back(std::move(lower));
      qp.labels.push_back({ConstraintLabel::Kind::box_lower, k, k});
    }
  }
  return qp;
}

std::pair<ControlVector, QPSolution> control_step(const SystemModel& model, const SystemState& state,
                                                  const ControlVector& u_prev, const SafetyParams& params,
                                                  double w_bar, const ControllerOptions& options) {
  QPSolution sol = solve_qp(assemble_constraints(model, state, u_prev, params, w_bar, options), options.qp);
  ControlVector u = unflatten(sol.u_star, model.config().n_agents, model.config().control_dim);
  return {std::move(u), std::move(sol)};
}

}  // namespace cbfcert
