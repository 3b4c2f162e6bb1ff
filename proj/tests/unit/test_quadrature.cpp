#include "extdep/angular_model.hpp"
#include "extdep/error.hpp"
#include "extdep/simplex_quadrature.hpp"
#include "logistic_quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace extdep;

TEST(SimplexQuadrature, ConstantGivesVolume) {
  auto one = [](std::span<const double>) { return 1.0; };
  EXPECT_NEAR(integrate_simplex(one, 2, 1e-10).value, 1.0, 1e-12);
  EXPECT_NEAR(integrate_simplex(one, 3, 1e-10).value, 0.5, 1e-12);
  EXPECT_NEAR(integrate_simplex(one, 4, 1e-10).value, 1.0 / 6.0, 1e-12);
}

TEST(SimplexQuadrature, FirstCoordinate) {
  auto w1 = [](std::span<const double> w) { return w[0]; };
  EXPECT_NEAR(integrate_simplex(w1, 3, 1e-10).value, 1.0 / 6.0, 1e-12);
  auto w3 = [](std::span<const double> w) { return w[2]; };
  EXPECT_NEAR(integrate_simplex(w3, 3, 1e-10).value, 1.0 / 6.0, 1e-12);
}

TEST(SimplexQuadrature, PolynomialMoments) {
  // int w1^2 w2 over the 2-simplex = 2! 1! 0! / 5! = 1/60
  auto f = [](std::span<const double> w) { return w[0] * w[0] * w[1]; };
  EXPECT_NEAR(integrate_simplex(f, 3, 1e-12).value, 1.0 / 60.0, 1e-13);
  // int w1 w2 w3 w4 over the 3-simplex = 1 / 7!
  auto g = [](std::span<const double> w) { return w[0] * w[1] * w[2] * w[3]; };
  EXPECT_NEAR(integrate_simplex(g, 4, 1e-12).value, 1.0 / 5040.0, 1e-14);
}

TEST(SimplexQuadrature, TiltedDirichletNormalization) {
  const std::vector<double> a{2, 2.5, 30};
  const AngularModel m = AngularModel::tilted_dirichlet(a);
  auto h = [&](std::span<const double> w) { return angular_density(m, w); };
  const QuadratureResult r = integrate_simplex(h, 3, 1e-7);
  EXPECT_NEAR(r.value, 1.0, 1e-5);
  EXPECT_LE(r.error, 1e-6);

  // independent cross-check: uniform points on the simplex, area 1/2
  std::mt19937_64 rng(21);
  std::exponential_distribution<double> e;
  const int n = 400000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    double w[3] = {e(rng), e(rng), e(rng)};
    const double t = w[0] + w[1] + w[2];
    for (double& x : w) x /= t;
    const double v = 0.5 * angular_density(m, w);
    s += v;
    s2 += v * v;
  }
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_LE(std::abs(mean - r.value), 4 * se);
}

TEST(SimplexQuadrature, BudgetExhaustionCarriesEstimate) {
  auto f = [](std::span<const double> w) { return 1.0 / std::sqrt(w[0] * w[1]); };
  try {
    integrate_simplex(f, 3, 1e-14, 500);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_GT(e.estimate(), 0.0);
    EXPECT_GT(e.error_estimate(), 0.0);
  }
}

TEST(SimplexQuadrature, RejectsUnsupportedDimension) {
  auto one = [](std::span<const double>) { return 1.0; };
  EXPECT_THROW(integrate_simplex(one, 5, 1e-6), UnsupportedError);
  EXPECT_THROW(integrate_simplex(one, 3, 0.0), ValidationError);
}

TEST(LogisticQuadrature, VolumeAndMoments) {
  const detail::LogisticOptions o;
  auto zero = [](std::span<const double>) { return 0.0; };
  EXPECT_NEAR(detail::integrate_logistic(3, zero, o).value, 0.5, 1e-7);
  EXPECT_NEAR(detail::integrate_logistic(4, zero, o).value, 1.0 / 6.0, 1e-7);
  auto logw1 = [](std::span<const double> lw) { return lw[0]; };
  EXPECT_NEAR(detail::integrate_logistic(3, logw1, o).value, 1.0 / 6.0, 1e-7);
}

TEST(LogisticQuadrature, BoundarySingularDensity) {
  // Dirichlet(0.1, 0.1, 0.1) density integrates to one despite the corner spikes
  const double a = 0.1;
  const double logc = std::lgamma(3 * a) - 3 * std::lgamma(a);
  auto f = [&](std::span<const double> lw) { return logc + (a - 1) * (lw[0] + lw[1] + lw[2]); };
  detail::LogisticOptions o;
  o.tol = 1e-10;
  o.scale = 1.0 / a;
  EXPECT_NEAR(detail::integrate_logistic(3, f, o).value, 1.0, 1e-7);
}

TEST(LogisticQuadrature, LogSumExp) {
  const std::vector<double> v{1000.0, 1000.0};
  EXPECT_NEAR(detail::log_sum_exp(v), 1000.0 + std::log(2.0), 1e-12);
  const std::vector<double> z{0.3, -1.2};
  std::vector<double> lw(3);
  detail::logistic_logw(z, lw);
  EXPECT_NEAR(std::exp(lw[0]) + std::exp(lw[1]) + std::exp(lw[2]), 1.0, 1e-15);
  EXPECT_NEAR(lw[0] - lw[2], 0.3, 1e-15);
}
