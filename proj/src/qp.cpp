#include "cbfcert/qp.hpp"

#include "cbfcert/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cbfcert {

std::size_t QPProblem::pair_constraint_count() const {
  return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](const ConstraintLabel& l) {
    return l.kind == ConstraintLabel::Kind::pair;
  }));
}

std::string_view to_string(QPStatus status) {
  switch (status) {
    case QPStatus::optimal: return "optimal";
    case QPStatus::infeasible_relaxed: return "infeasible_relaxed";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct DualActiveSetResult {
  bool feasible = false;
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;  // one per constraint column
  int iterations = 0;
};

// Goldfarb-Idnani for min 0.5 |x|^2 s.t. normals.col(k)^T x >= b(k).
// With H = I the primal step direction is the projection of the new normal
// onto the null space of the active normals, and the dual step direction is
// the least-squares coefficient vector of that normal in the active span.
DualActiveSetResult dual_active_set(const Eigen::MatrixXd& normals, const Eigen::VectorXd& b, double tol,
                                    int max_iterations) {
  const Eigen::Index dim = normals.rows();
  const Eigen::Index count = normals.cols();
  DualActiveSetResult res;
  res.x = Eigen::VectorXd::Zero(dim);
  res.lambda = Eigen::VectorXd::Zero(count);

  std::vector<Eigen::Index> active;
  std::vector<char> is_active(static_cast<std::size_t>(count), 0);

  auto active_matrix = [&] {
    Eigen::MatrixXd m(dim, static_cast<Eigen::Index>(active.size()));
    for (std::size_t c = 0; c < active.size(); ++c) m.col(static_cast<Eigen::Index>(c)) = normals.col(active[c]);
    return m;
  };

  while (true) {
    // Most violated inactive constraint.
    Eigen::Index p = -1;
    double worst = -tol;
    for (Eigen::Index k = 0; k < count; ++k) {
      if (is_active[static_cast<std::size_t>(k)]) continue;
      const double slack = normals.col(k).dot(res.x) - b(k);
      if (slack < worst) {
        worst = slack;
        p = k;
      }
    }
    if (p < 0) {
      res.feasible = true;
      return res;
    }

    const Eigen::VectorXd n_p = normals.col(p);
    const double scale = std::max(1.0, n_p.norm());
    double lambda_p = 0.0;

    while (true) {
      if (++res.iterations > max_iterations)
        throw SolverError("solve_qp: iteration limit " + std::to_string(max_iterations) + " exceeded");

      Eigen::VectorXd z = n_p;
      Eigen::VectorXd r;
      if (!active.empty()) {
        const Eigen::MatrixXd na = active_matrix();
        r = na.colPivHouseholderQr().solve(n_p);
        z = n_p - na * r;
      }

      // Partial (dual) step limit: first active multiplier to hit zero.
      double t1 = kInf;
      std::size_t drop = 0;
      for (std::size_t c = 0; c < active.size(); ++c) {
        const double rc = r(static_cast<Eigen::Index>(c));
        if (rc > 0.0) {
          const double ratio = res.lambda(active[c]) / rc;
          if (ratio < t1) {
            t1 = ratio;
            drop = c;
          }
        }
      }

      // Full (primal) step that makes constraint p tight.
      double t2 = kInf;
      const double zn = z.dot(n_p);
      if (z.norm() > 1e-12 * scale && zn > 0.0) {
        const double slack_p = n_p.dot(res.x) - b(p);
        t2 = std::max(0.0, -slack_p / zn);
      }

      const double t = std::min(t1, t2);
      if (t == kInf) return res;  // normal p is a non-negative combination of active normals: infeasible

      for (std::size_t c = 0; c < active.size(); ++c) res.lambda(active[c]) -= t * r(static_cast<Eigen::Index>(c));
      lambda_p += t;

      if (t2 < kInf) res.x += t * z;

      if (t2 <= t1) {
        res.lambda(p) = lambda_p;
        active.push_back(p);
        is_active[static_cast<std::size_t>(p)] = 1;
        break;
      }

      const Eigen::Index dropped = active[drop];
      res.lambda(dropped) = 0.0;
      is_active[static_cast<std::size_t>(dropped)] = 0;
      active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
    }
  }
}

void check_inputs(const QPProblem& problem) {
  if (!problem.labels.empty() && problem.labels.size() != problem.constraints.size())
    throw InputError("solve_qp: labels and constraints differ in length");
  for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
    const auto& c = problem.constraints[k];
    if (static_cast<std::size_t>(c.a.size()) != problem.dim)
      throw InputError("solve_qp: constraint " + std::to_string(k) + " has wrong dimension");
    if (!c.a.allFinite() || !std::isfinite(c.b))
      throw InputError("solve_qp: constraint " + std::to_string(k) + " has non-finite data");
  }
}

}  // namespace

QPSolution solve_qp(const QPProblem& problem, const QPOptions& options) {
  check_inputs(problem);
  const auto dim = static_cast<Eigen::Index>(problem.dim);
  const auto count = static_cast<Eigen::Index>(problem.constraints.size());

  Eigen::MatrixXd normals(dim, count);
  Eigen::VectorXd b(count);
  for (Eigen::Index k = 0; k < count; ++k) {
    normals.col(k) = problem.constraints[static_cast<std::size_t>(k)].a;
    b(k) = problem.constraints[static_cast<std::size_t>(k)].b;
  }

  QPSolution sol;
  DualActiveSetResult res = dual_active_set(normals, b, options.tol, options.max_iterations);
  sol.iterations = res.iterations;

  if (res.feasible) {
    sol.u_star = res.x;
    sol.duals = res.lambda;
    sol.status = QPStatus::optimal;
  } else {
    // Shared slack, rescaled as sigma = sqrt(rho) s so the objective stays |y|^2.
    const double inv_root_rho = 1.0 / std::sqrt(options.relax_rho);
    Eigen::MatrixXd relaxed = Eigen::MatrixXd::Zero(dim + 1, count + 1);
    relaxed.topLeftCorner(dim, count) = normals;
    relaxed.row(dim).head(count).setConstant(inv_root_rho);
    relaxed(dim, count) = 1.0;
    Eigen::VectorXd relaxed_b(count + 1);
    relaxed_b << b, 0.0;

    DualActiveSetResult rr = dual_active_set(relaxed, relaxed_b, options.tol, options.max_iterations);
    sol.iterations += rr.iterations;
    if (!rr.feasible) throw SolverError("solve_qp: relaxed problem reported infeasible");
    sol.u_star = rr.x.head(dim);
    sol.slack_used = std::max(0.0, rr.x(dim) * inv_root_rho);
    sol.duals = rr.lambda.head(count);
    sol.status = QPStatus::infeasible_relaxed;
  }

  for (Eigen::Index k = 0; k < count; ++k) {
    if (std::abs(normals.col(k).dot(sol.u_star) - b(k)) <= options.tol_active)
      sol.active_set.push_back(static_cast<std::size_t>(k));
  }
  return sol;
}

}  // namespace cbfcert
