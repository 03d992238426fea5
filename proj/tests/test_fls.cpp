#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "spreadmon/fls.hpp"
#include "spreadmon/rng.hpp"

namespace {

std::vector<double> fls_betas(const std::vector<double>& p1,
                              const std::vector<double>& p2, double mu,
                              double S1 = 0.0, double s1 = 0.0) {
  auto state = spreadmon::fls_init(S1, s1, mu);
  std::vector<double> betas;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    const auto stepped = spreadmon::fls_step(state, p1[i], p2[i]);
    state = stepped.state;
    betas.push_back(stepped.beta);
  }
  return betas;
}

// Oracle: exact minimizer of
//   sum_t (p1_t - b_t p2_t)^2 + mu sum_t (b_{t+1} - b_t)^2
// by solving the tridiagonal normal equations densely.
Eigen::VectorXd batch_minimizer(const std::vector<double>& p1,
                                const std::vector<double>& p2, double mu) {
  const auto T = static_cast<Eigen::Index>(p1.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(T, T);
  Eigen::VectorXd c(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    m(t, t) = p2[t] * p2[t];
    c(t) = p1[t] * p2[t];
  }
  for (Eigen::Index t = 0; t + 1 < T; ++t) {
    m(t, t) += mu;
    m(t + 1, t + 1) += mu;
    m(t, t + 1) -= mu;
    m(t + 1, t) -= mu;
  }
  return m.ldlt().solve(c);
}

std::vector<double> random_walk_prices(std::uint64_t seed, std::size_t n,
                                       double level, double step_sd) {
  spreadmon::NormalRng rng(seed);
  std::vector<double> p(n);
  double x = level;
  for (std::size_t i = 0; i < n; ++i) {
    x += step_sd * rng.normal();
    p[i] = x;
  }
  return p;
}

}  // namespace

TEST_CASE("fls_init validation") {
  CHECK_NOTHROW(spreadmon::fls_init(0.0, 0.0, 1e6));
  CHECK_NOTHROW(spreadmon::fls_init(0.0, 0.0, 0.0));
  CHECK_THROWS_AS(spreadmon::fls_init(-1.0, 0.0, 1.0),
                  spreadmon::ArgumentError);
  CHECK_THROWS_AS(spreadmon::fls_init(0.0, 0.0, -1.0),
                  spreadmon::ArgumentError);
}

TEST_CASE("proportional prices pin beta at the ratio") {
  for (double mu : {0.0, 1.0, 1e6}) {
    auto state = spreadmon::fls_init(0.0, 0.0, mu);
    for (double p2 : {3.0, 1.5, 7.0, 2.25}) {
      const auto stepped = spreadmon::fls_step(state, 1.5 * p2, p2);
      state = stepped.state;
      CHECK(stepped.beta == doctest::Approx(1.5).epsilon(1e-14));
    }
  }
}

TEST_CASE("mu = 0 decouples the ticks") {
  const std::vector<double> p1{2.0, -1.0, 5.0};
  const std::vector<double> p2{4.0, 2.0, -2.5};
  const auto betas = fls_betas(p1, p2, 0.0);
  for (std::size_t i = 0; i < p1.size(); ++i)
    CHECK(betas[i] == doctest::Approx(p1[i] / p2[i]).epsilon(1e-15));
}

TEST_CASE("degenerate regressor is rejected") {
  auto state = spreadmon::fls_init(0.0, 0.0, 1.0);
  CHECK_THROWS_AS(spreadmon::fls_step(state, 1.0, 0.0),
                  spreadmon::DegenerateRegressorError);
  CHECK_THROWS_AS(
      spreadmon::fls_step(state, std::numeric_limits<double>::quiet_NaN(),
                          1.0),
      spreadmon::ArgumentError);
}

TEST_CASE("recursion equals the batch minimizer") {
  SUBCASE("T = 3, mu = 1, fixed instance") {
    const std::vector<double> p1{2.0, 3.5, 1.0};
    const std::vector<double> p2{1.0, 2.0, 1.5};
    const auto betas = fls_betas(p1, p2, 1.0);
    const auto exact = batch_minimizer(p1, p2, 1.0);
    CHECK(betas.back() == doctest::Approx(exact(2)).epsilon(1e-12));
  }

  SUBCASE("random instances up to T = 5") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_int_distribution<int> len(1, 5);
    for (int trial = 0; trial < 30; ++trial) {
      const int T = len(rng);
      std::vector<double> p1(T), p2(T);
      for (int t = 0; t < T; ++t) {
        p1[t] = 2.0 * unif(rng) + 1.0;
        p2[t] = 2.0 * unif(rng) + 3.0;
      }
      const double mu = 0.1 + 5.0 * (unif(rng) + 1.0);
      const auto betas = fls_betas(p1, p2, mu);
      const auto exact = batch_minimizer(p1, p2, mu);
      CHECK(std::abs(betas.back() - exact(T - 1)) <= 1e-9);
    }
  }
}

TEST_CASE("huge mu approaches ordinary least squares") {
  const auto p2 = random_walk_prices(11, 500, 4.0, 0.04);
  spreadmon::NormalRng noise(12);
  std::vector<double> p1(p2.size());
  for (std::size_t i = 0; i < p2.size(); ++i)
    p1[i] = 1.7 * p2[i] + 0.05 * noise.normal();

  // running no-intercept OLS slope
  std::vector<double> ols(p2.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < p2.size(); ++i) {
    sxy += p1[i] * p2[i];
    sxx += p2[i] * p2[i];
    ols[i] = sxy / sxx;
  }

  double previous = std::numeric_limits<double>::infinity();
  for (double mu : {1e4, 1e6, 1e8}) {
    const auto betas = fls_betas(p1, p2, mu);
    double worst = 0.0;
    for (std::size_t i = 0; i < betas.size(); ++i)
      worst = std::max(worst, std::abs(betas[i] - ols[i]));
    CHECK(worst < previous);
    previous = worst;
    if (mu == 1e8)
      CHECK(std::abs(betas.back() - ols.back()) <=
            1e-5 * std::abs(ols.back()));
  }
}

TEST_CASE("scale equivariance from zero initialization") {
  const std::vector<double> p1{2.0, 3.5, 1.0, -0.5};
  const std::vector<double> p2{1.0, 2.0, 1.5, 2.5};
  const double mu = 3.0;
  const auto base = fls_betas(p1, p2, mu);

  // p1 -> c p1 scales beta by c (same mu); exact for power-of-two c
  const double c = 4.0;
  std::vector<double> p1c(p1);
  for (double& v : p1c) v *= c;
  const auto scaled1 = fls_betas(p1c, p2, mu);
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(scaled1[i] == c * base[i]);

  // p2 -> c p2 scales beta by 1/c once mu is rescaled by c^2
  std::vector<double> p2c(p2);
  for (double& v : p2c) v *= c;
  const auto scaled2 = fls_betas(p1, p2c, mu * c * c);
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(scaled2[i] == base[i] / c);
}

TEST_CASE("make_spread") {
  CHECK(spreadmon::make_spread(10.0, 4.0, 2.0).y == 2.0);
  CHECK(spreadmon::make_spread(7.5, 4.0, 0.0).y == 7.5);
  CHECK(spreadmon::make_spread(6.0, 4.0, 6.0 / 4.0).y == 0.0);
}

TEST_CASE("run_fls and the demean flag") {
  const auto p2 = random_walk_prices(21, 400, 6.0, 0.03);
  spreadmon::NormalRng noise(22);
  std::vector<double> p1(p2.size());
  const double alpha = 5.0;
  for (std::size_t i = 0; i < p2.size(); ++i)
    p1[i] = alpha + 1.5 * p2[i] + 0.05 * noise.normal();

  const auto raw = spreadmon::run_fls<double>(p1, p2, 1e8, false);
  const auto centered = spreadmon::run_fls<double>(p1, p2, 1e8, true);
  REQUIRE(raw.size() == p1.size());
  for (const auto& tick : raw)
    CHECK(tick.y == tick.p1 - tick.beta * tick.p2);  // exact by construction
  // with an intercept in the pair, demeaning gets closer to the true slope
  CHECK(std::abs(centered.back().beta - 1.5) <
        std::abs(raw.back().beta - 1.5));

  std::vector<double> shorter(p2.begin(), p2.end() - 1);
  CHECK_THROWS_AS(spreadmon::run_fls<double>(p1, shorter, 1.0),
                  spreadmon::ArgumentError);
}
