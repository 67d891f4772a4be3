#include "cbfcert/errors.hpp"
#include "cbfcert/safety.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace cbfcert;
using Catch::Approx;

namespace {

Eigen::VectorXd v2(double a, double b) { return Eigen::Vector2d(a, b); }

Eigen::VectorXd random_point(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> U(lo, hi);
  return v2(U(rng), U(rng));
}

}  // namespace

TEST_CASE("h_pair examples") {
  const SafetyParams p;
  CHECK(h_pair(v2(2, 0), v2(0, 0), p) == Approx(3.0));
  CHECK(h_pair(v2(0.6, 0.8), v2(0, 0), p) == Approx(0.0).margin(1e-15));
  CHECK(h_pair(v2(1.5, -2), v2(1.5, -2), p) == -1.0);
}

TEST_CASE("grad_h_pair examples and finite differences") {
  const SafetyParams p;
  CHECK(grad_h_pair(v2(2, 0), v2(0, 0), p).isApprox(v2(4, 0)));
  CHECK(grad_h_pair(v2(1, 1), v2(1, 1), p).isZero());

  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd xi = random_point(rng, -5, 5), xj = random_point(rng, -5, 5);
    const Eigen::VectorXd fd = oracle::fd_gradient([&](const Eigen::VectorXd& x) { return h_pair(x, xj, p); }, xi);
    CHECK((grad_h_pair(xi, xj, p) - fd).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("propagation vector examples") {
  const SafetyParams p;
  CHECK(propagation_vector(v2(3, 4), v2(3, 4), p).isZero());
  const Eigen::VectorXd A = propagation_vector(v2(1, 0), v2(0, 0), p);
  CHECK(A(0) == Approx(0.3678794).margin(1e-7));
  CHECK(A(1) == 0.0);
}

TEST_CASE("propagation vector is odd and bounded by exp(-|dx|^2)") {
  const SafetyParams p;
  std::mt19937_64 rng(12);
  for (int k = 0; k < 1000; ++k) {
    const Eigen::VectorXd xi = random_point(rng, -3, 3), xj = random_point(rng, -3, 3);
    const Eigen::VectorXd a = propagation_vector(xi, xj, p);
    CHECK((a + propagation_vector(xj, xi, p)).isZero(0.0));
    CHECK(a.norm() <= std::exp(-(xi - xj).squaredNorm()) + 1e-15);
    CHECK(a.allFinite());
  }
}

TEST_CASE("propagation Jacobian matches finite differences") {
  const SafetyParams p;
  std::mt19937_64 rng(13);
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd xi = random_point(rng, -1.5, 1.5), xj = random_point(rng, -1.5, 1.5);
    const Eigen::MatrixXd J = propagation_jacobian(xi, xj, p);
    for (Eigen::Index r = 0; r < 2; ++r) {
      const Eigen::VectorXd fd =
          oracle::fd_gradient([&](const Eigen::VectorXd& x) { return propagation_vector(x, xj, p)(r); }, xi);
      CHECK((J.row(r).transpose() - fd).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("psi_safety examples") {
  SafetyParams p;
  const Eigen::VectorXd xi = v2(1, 0), xj = v2(0, 0);
  CHECK(psi_safety(xi, xj, v2(0.3, 0.2), v2(0.3, 0.2), p) == h_pair(xi, xj, p));
  p.psi = 2.0;
  CHECK(psi_safety(xi, xj, v2(1, 0), v2(0, 0), p) == Approx(0.7357588).margin(1e-7));
  p.psi = 0.0;
  CHECK(psi_safety(xi, xj, v2(5, -1), v2(0, 3), p) == h_pair(xi, xj, p));
}

TEST_CASE("psi_safety is affine in the control difference") {
  SafetyParams p;
  p.psi = 3.0;
  std::mt19937_64 rng(14);
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd xi = random_point(rng, -1, 1), xj = random_point(rng, -1, 1);
    const Eigen::VectorXd u0 = random_point(rng, -2, 2), u1 = random_point(rng, -2, 2);
    const Eigen::VectorXd uj = random_point(rng, -2, 2);
    const double t = 0.37;
    const double mid = psi_safety(xi, xj, (1 - t) * u0 + t * u1, uj, p);
    const double lin = (1 - t) * psi_safety(xi, xj, u0, uj, p) + t * psi_safety(xi, xj, u1, uj, p);
    CHECK(mid == Approx(lin).margin(1e-12));
  }
}

TEST_CASE("disturbance margin examples") {
  const SafetyParams p;
  // grad h = 2 dx = (3, 4)
  const Eigen::VectorXd xi = v2(1.5, 2.0), xj = v2(0, 0);
  CHECK(disturbance_margin(xi, xj, 0.05, p) == Approx(0.5));
  CHECK(disturbance_margin(xi, xj, 0.0, p) == 0.0);
  CHECK(disturbance_margin(xj, xj, 0.05, p) == 0.0);
}

TEST_CASE("disturbance margin equals the sup over both noise balls") {
  const SafetyParams p;
  const double w_bar = 0.05;

  SECTION("angle grid on the sphere boundaries for grad h = (3, 4)") {
    const Eigen::Vector2d g(3, 4);
    double sup = 0.0;
    const int n = 720;
    for (int a = 0; a < n; ++a) {
      const double ta = 2 * std::numbers::pi * a / n;
      for (int b = 0; b < n; ++b) {
        const double tb = 2 * std::numbers::pi * b / n;
        const Eigen::Vector2d wi = w_bar * Eigen::Vector2d(std::cos(ta), std::sin(ta));
        const Eigen::Vector2d wj = w_bar * Eigen::Vector2d(std::cos(tb), std::sin(tb));
        sup = std::max(sup, std::abs(g.dot(wi - wj)));
      }
    }
    CHECK(sup <= 0.5 + 1e-12);
    CHECK(sup == Approx(0.5).epsilon(1e-3));
  }
  SECTION("sampled pairs at random states") {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> angle(0, 2 * std::numbers::pi);
    std::uniform_real_distribution<double> unit(0, 1);
    for (int k = 0; k < 20; ++k) {
      const Eigen::VectorXd xi = random_point(rng, 0, 10), xj = random_point(rng, 0, 10);
      const Eigen::VectorXd g = grad_h_pair(xi, xj, p);
      const double closed = disturbance_margin(xi, xj, w_bar, p);
      double sup = 0.0;
      for (int s = 0; s < 10000; ++s) {
        // interior draws never beat the boundary, so sample radius^(1/2)-uniform on the ball
        const double ri = w_bar * std::sqrt(unit(rng)), rj = w_bar * std::sqrt(unit(rng));
        const double ta = angle(rng), tb = angle(rng);
        const Eigen::Vector2d wi = ri * Eigen::Vector2d(std::cos(ta), std::sin(ta));
        const Eigen::Vector2d wj = rj * Eigen::Vector2d(std::cos(tb), std::sin(tb));
        sup = std::max(sup, std::abs(g.dot(wi - wj)));
        const Eigen::Vector2d bi = w_bar * Eigen::Vector2d(std::cos(ta), std::sin(ta));
        const Eigen::Vector2d bj = w_bar * Eigen::Vector2d(std::cos(tb), std::sin(tb));
        sup = std::max(sup, std::abs(g.dot(bi - bj)));
      }
      CHECK(sup <= closed * (1 + 1e-12));
      CHECK(sup >= 0.99 * closed);
    }
  }
}

TEST_CASE("class_k is linear and increasing") {
  SafetyParams p;
  CHECK(class_k(0.0, p) == 0.0);
  CHECK(class_k(3.0, p) == 3.0);
  p.kappa = 2.5;
  double prev = class_k(-10.0, p);
  for (double s = -9.9; s < 10.0; s += 0.1) {
    const double v = class_k(s, p);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("pair_margin orientation") {
  const SafetyParams p;
  const auto m = pair_margin(0, 1, v2(2, 0), v2(0, 0), v2(0, 0), v2(0, 0), 0.03, p);
  CHECK(m.h == Approx(3.0));
  CHECK(m.h_tilde == Approx(3.0));
  CHECK(m.grad_h_from(0).isApprox(v2(4, 0)));
  CHECK(m.grad_h_from(1).isApprox(v2(-4, 0)));
  CHECK(m.gamma == Approx(2 * 0.03 * 4));
}

TEST_CASE("invalid safety parameters") {
  SafetyParams p;
  p.psi = -1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = SafetyParams{};
  p.reg_eps = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = SafetyParams{};
  p.kappa = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
