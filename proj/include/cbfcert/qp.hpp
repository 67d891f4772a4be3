#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string_view>
#include <vector>

namespace cbfcert {

/// a^T u >= b
struct LinearConstraint {
  Eigen::VectorXd a;
  double b = 0.0;
};

struct ConstraintLabel {
  enum class Kind { pair, box_upper, box_lower };
  Kind kind = Kind::pair;
  std::size_t i = 0;  // first agent, or the control coordinate for box rows
  std::size_t j = 0;
};

/// min |u|^2 subject to a_k^T u >= b_k. The Hessian is the identity, so only
/// the constraints are stored.
struct QPProblem {
  std::size_t dim = 0;
  std::vector<LinearConstraint> constraints;
  std::vector<ConstraintLabel> labels;  // parallel to constraints

  std::size_t pair_constraint_count() const;
};

enum class QPStatus { optimal, infeasible_relaxed };

std::string_view to_string(QPStatus status);

struct QPSolution {
  Eigen::VectorXd u_star;
  /// Constraints with |a^T u - b| <= tol_active at the optimum. Diagnostic only.
  std::vector<std::size_t> active_set;
  QPStatus status = QPStatus::optimal;
  /// Shared slack s* of the relaxed problem; 0 when optimal.
  double slack_used = 0.0;
  /// KKT multipliers, one per constraint: u* = sum_k duals_k a_k.
  Eigen::VectorXd duals;
  int iterations = 0;
};

struct QPOptions {
  double tol = 1e-9;         // primal feasibility
  double tol_active = 1e-7;  // active-set reporting
  double relax_rho = 1e6;    // weight on s^2 in the relaxed problem
  int max_iterations = 10000;
};

/// Minimum-norm point of the constraint polyhedron via the Goldfarb-Idnani
/// dual active-set method. If the polyhedron is empty, re-solves
/// min |u|^2 + rho s^2 s.t. a^T u >= b - s, s >= 0 and reports infeasible_relaxed.
/// Throws InputError on non-finite data or mismatched dimensions.
QPSolution solve_qp(const QPProblem& problem, const QPOptions& options = {});

}  // namespace cbfcert
