#include "extdep/error.hpp"
#include "extdep/margins.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

using namespace extdep;

namespace {

std::vector<double> gpd_draws(std::size_t n, double sigma, double xi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = sigma * (std::pow(1 - u(rng), -xi) - 1) / xi;
  return x;
}

MarginalModel small_model(double q, std::vector<double> below) {
  const double u = *std::max_element(below.begin(), below.end());
  return MarginalModel(q, u, 2.0, 0.1, std::move(below));
}

}  // namespace

TEST(Gpd, CdfQuantileInverse) {
  for (double xi : {-0.3, 0.0, 0.25}) {
    for (double p : {0.01, 0.3, 0.9, 0.999}) {
      const double y = gpd_quantile(p, 1.7, xi);
      EXPECT_NEAR(gpd_cdf(y, 1.7, xi), p, 1e-13);
    }
  }
  EXPECT_NEAR(gpd_cdf(1.0, 1.0, 0.0), 1 - std::exp(-1.0), 1e-15);
  EXPECT_EQ(gpd_cdf(5.0, 1.0, -0.5), 1.0);  // past the upper end 2
  EXPECT_THROW(gpd_quantile(1.0, 1.0, 0.1), DomainError);
}

TEST(Gpd, LogLikelihoodMatchesDensity) {
  const std::vector<double> e{0.2, 1.5, 3.1};
  const double s = 1.3, xi = 0.2;
  double ll = 0;
  for (double v : e) ll += -std::log(s) - (1 / xi + 1) * std::log1p(xi * v / s);
  EXPECT_NEAR(gpd_log_likelihood(e, s, xi), ll, 1e-13);
}

TEST(FitGpdMargin, RecoversParametersWithinThreeStandardErrors) {
  // Threshold stability: excesses over the 0.7 quantile u are GPD(1 + 0.2 u, 0.2).
  const double xi = 0.2;
  int hits = 0;
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    const auto x = gpd_draws(5000, 1.0, xi, 100 + s);
    const MarginalModel m = fit_gpd_margin(x, 0.7);
    std::size_t ne = 0;
    for (double v : x) ne += v > m.threshold_value();
    const double sigma_u = 1 + xi * m.threshold_value();
    const double se_xi = (1 + xi) / std::sqrt(ne);
    const double se_sigma = sigma_u * std::sqrt(2 * (1 + xi) / ne);
    hits += std::abs(m.gpd_shape() - xi) < 3 * se_xi && std::abs(m.gpd_scale() - sigma_u) < 3 * se_sigma;
  }
  EXPECT_GE(hits, seeds - 1);
}

TEST(FitGpdMargin, ExponentialTailHasNearZeroShape) {
  std::mt19937_64 rng(9);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> x(100000);
  for (double& v : x) v = e(rng);
  const MarginalModel m = fit_gpd_margin(x, 0.7);
  EXPECT_LT(std::abs(m.gpd_shape()), 0.05);
  EXPECT_NEAR(m.gpd_scale(), 1.0, 0.05);
}

TEST(FitGpdMargin, Preconditions) {
  const auto x = gpd_draws(10, 1.0, 0.2, 1);
  EXPECT_THROW(fit_gpd_margin(x, 0.7), EstimationError);
  auto y = gpd_draws(200, 1.0, 0.2, 1);
  y[17] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(fit_gpd_margin(y, 0.7), ValidationError);
  const auto z = gpd_draws(60, 1.0, 0.2, 1);
  EXPECT_THROW(fit_gpd_margin(z, 0.9), EstimationError);  // 6 exceedances
  EXPECT_THROW(fit_gpd_margin(gpd_draws(200, 1, 0.2, 1), 1.0), ValidationError);
}

TEST(MarginalModel, CompositeCdfIsMonotoneAndContinuous) {
  const auto x = gpd_draws(2000, 2.0, 0.1, 4);
  const MarginalModel m = fit_gpd_margin(x, 0.7);
  EXPECT_NEAR(m.cdf(m.threshold_value()), 0.7, 1e-15);
  EXPECT_NEAR(m.cdf(m.threshold_value() + 1e-9), 0.7, 1e-8);
  const double lo = *std::min_element(x.begin(), x.end()), hi = *std::max_element(x.begin(), x.end());
  double prev = 0;
  for (int i = 0; i <= 1000; ++i) {
    const double v = m.cdf(lo + (hi - lo) * i / 1000.0);
    EXPECT_GE(v, prev);
    EXPECT_LE(v, 1.0);
    prev = v;
  }
  for (double v : m.below()) EXPECT_LE(m.cdf(v), 0.7);
  for (double p : {0.75, 0.9, 0.999}) EXPECT_NEAR(m.cdf(m.quantile(p)), p, 1e-12);
}

TEST(MarginalModel, RejectsInvalidConstruction) {
  EXPECT_THROW(MarginalModel(0.7, 1.0, -1.0, 0.1, {0.5}), ValidationError);
  EXPECT_THROW(MarginalModel(0.7, 1.0, 1.0, 0.1, {}), ValidationError);
  EXPECT_THROW(MarginalModel(0.7, 1.0, 1.0, 0.1, {2.0}), ValidationError);
  EXPECT_THROW(MarginalModel(1.2, 1.0, 1.0, 0.1, {0.5}), ValidationError);
}

TEST(UnitFrechet, KnownValues) {
  // seven non-exceedances at q = 0.7: F(5) = 0.7 * 5 / 7 = 0.5
  const MarginalModel half = small_model(0.7, {1, 2, 3, 4, 5, 6, 7});
  EXPECT_NEAR(to_unit_frechet(std::vector<double>{5}, half)[0], 1 / std::log(2.0), 1e-14);
  // two non-exceedances at q = 2/e: F(1) = 1/e
  const MarginalModel inv_e = small_model(2 * std::exp(-1.0), {1, 2});
  EXPECT_NEAR(to_unit_frechet(std::vector<double>{1}, inv_e)[0], 1.0, 1e-14);
}

TEST(UnitFrechet, RoundTripAndMonotone) {
  const auto x = gpd_draws(3000, 1.0, 0.3, 8);
  const MarginalModel m = fit_gpd_margin(x, 0.7);
  const auto y = to_unit_frechet(x, m);
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_GT(y[i], 0.0);
    EXPECT_NEAR(std::exp(-1 / y[i]), m.cdf(x[i]), 1e-12);
    if (i > 0) EXPECT_LE(y[order[i - 1]], y[order[i]]);
  }
}

TEST(UnitFrechet, TransformErrorNamesIndex) {
  const MarginalModel m = small_model(0.7, {1, 2, 3});
  try {
    to_unit_frechet(std::vector<double>{2, 3, 0.5, 0.1}, m);
    FAIL() << "expected TransformError";
  } catch (const TransformError& e) {
    EXPECT_EQ(e.index(), 2u);
  }
  // negative shape: F = 1 past the upper end point
  const MarginalModel bounded(0.7, 3.0, 1.0, -0.5, {1, 2, 3});
  EXPECT_NEAR(bounded.upper_endpoint(), 5.0, 1e-15);
  try {
    to_unit_frechet(std::vector<double>{2, 6}, bounded);
    FAIL() << "expected TransformError";
  } catch (const TransformError& e) {
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(PseudoPolar, Examples) {
  PointMatrix y(2, 2);
  y << 2, 2, 1, 3;
  const auto s = to_pseudo_polar(y);
  EXPECT_DOUBLE_EQ(s.radii[0], 4);
  EXPECT_DOUBLE_EQ(s.angles(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(s.radii[1], 4);
  EXPECT_DOUBLE_EQ(s.angles(1, 0), 0.25);
  EXPECT_DOUBLE_EQ(s.angles(1, 1), 0.75);
  PointMatrix bad(1, 2);
  bad << 1, 0;
  EXPECT_THROW(to_pseudo_polar(bad), ValidationError);
  PointMatrix one(1, 1);
  one << 1;
  EXPECT_THROW(to_pseudo_polar(one), ValidationError);
}

TEST(PseudoPolar, RoundTrip) {
  std::mt19937_64 rng(2);
  std::lognormal_distribution<double> ln(0, 2);
  PointMatrix y(200, 4);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = ln(rng);
  const auto s = to_pseudo_polar(y);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    EXPECT_NEAR(s.angles.row(i).sum(), 1.0, 1e-12);
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(s.radii[i] * s.angles(i, j), y(i, j), 1e-14 * y(i, j));
  }
}

TEST(SelectExtremes, KeepsLargestRadii) {
  std::mt19937_64 rng(5);
  std::exponential_distribution<double> e(1.0);
  PointMatrix y(528, 3);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = 1 / e(rng);
  const auto s = to_pseudo_polar(y);
  const auto top = select_extremes(s, 100);
  ASSERT_EQ(top.size(), 100u);
  std::vector<bool> kept(528, false);
  for (std::size_t i = 0; i < top.size(); ++i) {
    kept[top.source_rows[i]] = true;
    if (i > 0) EXPECT_GE(top.radii[i - 1], top.radii[i]);
    EXPECT_EQ(top.radii[i], s.radii[top.source_rows[i]]);
  }
  double min_kept = top.radii.minCoeff(), max_dropped = 0;
  for (std::size_t i = 0; i < 528; ++i)
    if (!kept[i]) max_dropped = std::max(max_dropped, s.radii[i]);
  EXPECT_GE(min_kept, max_dropped);

  const auto all = select_extremes(s, 528);
  EXPECT_NEAR(all.radii.sum(), s.radii.sum(), 1e-9);
  EXPECT_THROW(select_extremes(s, 529), ValidationError);
  EXPECT_THROW(select_extremes(s, 0), ValidationError);
}

TEST(SelectExtremes, TiesKeepInputOrder) {
  PointMatrix y(5, 2);
  y << 1, 1, 0.5, 1.5, 1.5, 0.5, 1.2, 0.8, 0.1, 1.9;
  const auto top = select_extremes(to_pseudo_polar(y), 3);
  EXPECT_EQ(top.source_rows, (std::vector<std::size_t>{0, 1, 2}));
}
