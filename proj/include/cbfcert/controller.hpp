#pragma once

#include "cbfcert/qp.hpp"
#include "cbfcert/safety.hpp"
#include "cbfcert/sysmodel.hpp"

#include <utility>

namespace cbfcert {

struct ControllerOptions {
  /// Fold psi * dA/dt^T (u_prev_i - u_prev_j), with dA/dt evaluated at the
  /// previous control, into the constraint right-hand side. Off: dA/dt = 0.
  bool freeze_adot = false;
  /// Optional symmetric box |u_k| <= control_bound on every control
  /// coordinate; 0 disables it.
  double control_bound = 0.0;
  QPOptions qp;

  void validate() const;
};

/// One row per unordered pair (i < j, lexicographic), encoding the
/// linearised psi-weighted CBF condition
///   dh/dt + psi dA/dt^T du + kappa (h + psi A^T du) >= gamma
/// as a^T u >= b, followed by the optional box rows.
QPProblem assemble_constraints(const SystemModel& model, const SystemState& state, const ControlVector& u_prev,
                               const SafetyParams& params, double w_bar, const ControllerOptions& options = {});

/// assemble_constraints + solve_qp, reshaped to one control row per agent.
std::pair<ControlVector, QPSolution> control_step(const SystemModel& model, const SystemState& state,
                                                  const ControlVector& u_prev, const SafetyParams& params,
                                                  double w_bar, const ControllerOptions& options = {});

/// Row-major flattening used by the QP: agent i occupies [i*m, (i+1)*m).
Eigen::VectorXd flatten(const ControlVector& u);
ControlVector unflatten(const Eigen::VectorXd& u, std::size_t n_agents, std::size_t control_dim);

}  // namespace cbfcert
