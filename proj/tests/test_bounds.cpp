#include "cbfcert/bounds.hpp"
#include "cbfcert/errors.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace cbfcert;
using Catch::Approx;

namespace {

using Flags = std::vector<std::uint8_t>;

double unbiased_variance(const Flags& x) {
  std::vector<double> v(x.begin(), x.end());
  return oracle::sample_variance(v);
}

}  // namespace

TEST_CASE("empirical mean examples") {
  CHECK(empirical_mean(Flags{1, 0, 0, 0}) == 0.25);
  CHECK(empirical_mean(Flags(10, 0)) == 0.0);
  Flags f(50, 0);
  f[0] = f[1] = 1;
  CHECK(empirical_mean(f) == Approx(0.04));
  CHECK_THROWS_AS(empirical_mean(Flags{}), InputError);
  CHECK_THROWS_AS(empirical_mean(Flags{0, 2}), InputError);
}

TEST_CASE("pairwise variance examples") {
  CHECK(pairwise_variance(Flags{1, 0, 0, 0}) == Approx(0.25));
  CHECK(pairwise_variance(Flags{1, 1, 0, 0}) == Approx(1.0 / 3.0));
  CHECK(pairwise_variance(Flags(7, 1)) == 0.0);
  CHECK_THROWS_AS(pairwise_variance(Flags{1}), InputError);
}

TEST_CASE("pairwise variance equals the unbiased sample variance and the pair sum") {
  std::mt19937_64 rng(61);
  std::uniform_int_distribution<std::size_t> len(2, 200);
  std::uniform_real_distribution<double> rate(0, 1);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t P = len(rng);
    std::bernoulli_distribution B(rate(rng));
    Flags x(P);
    for (auto& v : x) v = B(rng) ? 1 : 0;
    CHECK(std::abs(pairwise_variance(x) - unbiased_variance(x)) <= 1e-12);
    if (P <= 60) {
      double s = 0.0;
      for (std::size_t i = 0; i < P; ++i)
        for (std::size_t j = i + 1; j < P; ++j) s += (x[i] - x[j]) * (x[i] - x[j]);
      CHECK(std::abs(pairwise_variance(x) - s / (P * (P - 1.0))) <= 1e-12);
    }
  }
}

TEST_CASE("Bernstein examples") {
  CHECK(bernstein_slack(0.0, 50, 0.1) == Approx(7.0 * std::log(20.0) / 147.0).margin(1e-12));
  CHECK(bernstein_slack(0.0, 50, 0.1) == Approx(0.142653).margin(5e-7));
  CHECK(bernstein_bound(0.0, 0.0, 50, 0.1) == bernstein_slack(0.0, 50, 0.1));
  // sqrt(2 * 0.25 * ln 20 / 50) + 7 ln 20 / 147 = 0.173082 + 0.142653
  const double expected = std::sqrt(0.5 * std::log(20.0) / 50.0) + 7.0 * std::log(20.0) / 147.0;
  CHECK(bernstein_slack(0.25, 50, 0.1) == Approx(expected).margin(1e-12));
  CHECK(bernstein_slack(0.25, 50, 0.1) == Approx(0.31572).margin(5e-5));
  CHECK(bernstein_bound(0.2, 0.25, 50, 0.1) == Approx(0.2 + expected).margin(1e-12));
}

TEST_CASE("Hoeffding and scenario examples") {
  CHECK(hoeffding_bound(50, 0.1) == Approx(0.17308).margin(5e-6));
  CHECK(hoeffding_bound(200, 0.1) == Approx(0.5 * hoeffding_bound(50, 0.1)).margin(1e-15));
  CHECK(scenario_bound(0, 50, 0.1) == Approx(0.046052).margin(5e-7));
  CHECK(scenario_bound(1, 50, 0.1) == Approx(0.066052).margin(5e-7));
  CHECK(scenario_bound(50, 50, 0.1) > 1.0);
}

TEST_CASE("bounds shrink with P and grow with confidence and variance") {
  for (std::size_t P = 2; P < 500; P += 7) {
    CHECK(hoeffding_bound(P + 1, 0.1) < hoeffding_bound(P, 0.1));
    CHECK(bernstein_slack(0.1, P + 1, 0.1) < bernstein_slack(0.1, P, 0.1));
    CHECK(scenario_bound(1, P + 1, 0.1) < scenario_bound(1, P, 0.1));
  }
  for (double d = 0.01; d < 0.9; d += 0.01) {
    CHECK(hoeffding_bound(50, d) > hoeffding_bound(50, d + 0.01));
    CHECK(bernstein_slack(0.1, 50, d) > bernstein_slack(0.1, 50, d + 0.01));
  }
  for (double s = 0.0; s < 0.25; s += 0.01) CHECK(bernstein_slack(s, 50, 0.1) < bernstein_slack(s + 0.01, 50, 0.1));
}

TEST_CASE("support counting") {
  CHECK(count_support(std::vector<double>{0.3, 0.1, 0.7}, 1e-9) == 0);
  CHECK(count_support(std::vector<double>{0.1, 0.5, 0.1}, 1e-9) == 1);
  CHECK(count_support(std::vector<double>{0.0, 0.0, 0.0, 0.2}, 1e-9) == 2);
  CHECK(count_support(std::vector<double>{0.1, 0.1 + 5e-10}, 1e-9) == 1);
  CHECK_THROWS_AS(count_support(std::vector<double>{}, 1e-9), InputError);
}

TEST_CASE("group statistics combine the primitives") {
  Flags x(50, 0);
  x[3] = x[9] = x[20] = 1;
  std::vector<double> z(50, 0.5);
  z[3] = 0.01;
  const auto s = group_stats(x, z, 0.1, 1e-9);
  CHECK(s.p_hat == Approx(0.06));
  CHECK(s.sigma2_hat == Approx(unbiased_variance(x)));
  CHECK(s.eps_bernstein == Approx(bernstein_slack(s.sigma2_hat, 50, 0.1)));
  CHECK(s.eps_hoeffding == Approx(0.17308).margin(5e-6));
  CHECK(s.d_support == 0);
  CHECK(s.bernstein_full() == Approx(s.p_hat + s.eps_bernstein));
}

TEST_CASE("Bernstein coverage on synthetic Bernoulli groups") {
  std::mt19937_64 rng(62);
  std::bernoulli_distribution B(0.05);
  const int groups = 10000;
  int covered = 0;
  Flags x(50);
  for (int g = 0; g < groups; ++g) {
    for (auto& v : x) v = B(rng) ? 1 : 0;
    if (0.05 <= empirical_mean(x) + bernstein_slack(pairwise_variance(x), 50, 0.1)) ++covered;
  }
  CHECK(covered >= static_cast<int>(oracle::binomial_lower_quantile(groups, 0.9, 0.001)));
}

TEST_CASE("satisfaction fractions") {
  SECTION("all groups at the pooled rate") {
    std::vector<GroupStats> g(5);
    for (auto& s : g) {
      s.p_hat = 0.1;
      s.eps_bernstein = s.eps_hoeffding = s.eps_scenario = 0.01;
    }
    const auto f = satisfaction_stats(g, 0.1);
    CHECK(f.bernstein == 1.0);
    CHECK(f.hoeffding == 1.0);
    CHECK(f.scenario == 1.0);
  }
  SECTION("zero slack counts groups at or above the pooled rate") {
    std::vector<GroupStats> g(4);
    g[0].p_hat = 0.0;
    g[1].p_hat = 0.1;
    g[2].p_hat = 0.2;
    g[3].p_hat = 0.3;
    const auto f = satisfaction_stats(g, 0.15);
    CHECK(f.bernstein == 0.5);
    CHECK(f.hoeffding == 0.5);
    CHECK(f.scenario == 0.5);
  }
  CHECK_THROWS_AS(satisfaction_stats(std::vector<GroupStats>{}, 0.1), InputError);
}

TEST_CASE("analytic certificate") {
  AnalyticBoundInputs in;
  in.h_min = 0.0;
  CHECK(analytic_delta(in) == 1.0);

  in.h_min = 1.0;
  in.K = 500;
  in.sigma2_step = 0.0288;
  in.c_increment = 1.0;
  in.n_pairs = 1;
  // 2*500*0.0288 + 2/3 = 29.4667; exp(-1/29.4667) = 0.966632
  CHECK(analytic_delta(in) == Approx(std::exp(-1.0 / (28.8 + 2.0 / 3.0))).margin(1e-12));
  CHECK(analytic_delta(in) == Approx(0.96662).margin(2e-5));

  double prev = 0.0;
  for (std::size_t K = 1; K < 100000; K *= 3) {
    in.K = K;
    const double d = analytic_delta(in);
    CHECK(d >= prev);
    prev = d;
  }
  CHECK(prev > 0.999);

  in.K = 1;
  in.n_pairs = 1000;
  CHECK(analytic_delta(in) <= 1.0);
}

TEST_CASE("analytic inputs") {
  CHECK(sup_grad_h(10.0, 2) == Approx(28.2843).margin(1e-4));
  CHECK(step_variance(0.03, sup_grad_h(10.0, 2), 0.1) == Approx(0.0288).margin(1e-12));
  CHECK(increment_bound(0.1, 10.0, 1.0, 0.05) == Approx(0.1 * 10.0 * 2.1));
}
