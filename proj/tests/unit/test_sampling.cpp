#include "extdep/angular_model.hpp"
#include "extdep/error.hpp"
#include "extdep/sampling.hpp"
#include "extdep/simplex_quadrature.hpp"
#include "test_support.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace extdep;
namespace tsup = extdep::testing;

namespace {

// Kolmogorov-Smirnov distance of the w1 draws from a bivariate model without
// atoms; the CDF is accumulated piecewise between consecutive sorted draws.
double ks_distance(const AngularModel& m, std::vector<double> x) {
  std::sort(x.begin(), x.end());
  auto h = [&](double t) {
    const std::vector<double> w{t, 1 - t};
    return angular_density(m, w);
  };
  const double n = static_cast<double>(x.size());
  double dmax = 0, cdf = 0, prev = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > prev) cdf += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(h, prev, x[i], 8, 1e-10);
    prev = x[i];
    dmax = std::max({dmax, (i + 1) / n - cdf, cdf - i / n});
  }
  return dmax;
}

std::vector<double> column(const PointMatrix& w, int j) {
  std::vector<double> c(static_cast<std::size_t>(w.rows()));
  for (Eigen::Index i = 0; i < w.rows(); ++i) c[static_cast<std::size_t>(i)] = w(i, j);
  return c;
}

}  // namespace

TEST(Sampling, SameSeedSameDraws) {
  const AngularModel m = tsup::fitted_hr();
  const PointMatrix a = sample_angular(m, 500, 42);
  const PointMatrix b = sample_angular(m, 500, 42);
  const PointMatrix c = sample_angular(m, 500, 43);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
}

TEST(Sampling, DrawsLieOnTheSimplex) {
  for (const auto& [label, m] : tsup::illustration_models()) {
    const PointMatrix w = sample_angular(m, 300, 7);
    ASSERT_EQ(w.rows(), 300);
    ASSERT_EQ(w.cols(), 3);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      EXPECT_NEAR(w.row(i).sum(), 1.0, 1e-12) << label;
      EXPECT_GE(w.row(i).minCoeff(), 0.0) << label;
    }
  }
}

TEST(Sampling, EmptyRequest) {
  const PointMatrix w = sample_angular(tsup::fitted_td(), 0, 1);
  EXPECT_EQ(w.rows(), 0);
  EXPECT_EQ(w.cols(), 3);
}

TEST(Sampling, CoordinateMeansAreOneOverD) {
  const std::vector<AngularModel> models{
      tsup::fitted_hr(), tsup::fitted_td(), AngularModel::pairwise_beta(1, std::vector<double>{2, 4, 15}, 3),
      AngularModel::extremal_t(std::vector<double>{0.52, 0.71, 0.52}, 2.0, 3),
      AngularModel::asym_logistic_exchangeable(1.4, std::vector<double>{0.7, 0.15, 0.15}),
      AngularModel::husler_reiss(std::vector<double>{0.7, 0.8, 0.9, 0.75, 0.85, 0.8}, 4)};
  for (const auto& m : models) {
    const int n = 20000;
    const PointMatrix w = sample_angular(m, n, 11);
    for (int j = 0; j < m.dim(); ++j) {
      const Eigen::VectorXd c = w.col(j);
      const double mean = c.mean();
      const double sd = std::sqrt((c.array() - mean).square().sum() / (n - 1));
      EXPECT_NEAR(mean, 1.0 / m.dim(), 4 * sd / std::sqrt(n)) << family_code(m.family()) << " j=" << j;
    }
  }
}

TEST(Sampling, SymmetricModelHasEqualMeans) {
  const AngularModel m = AngularModel::tilted_dirichlet(std::vector<double>{2, 2, 2});
  const PointMatrix w = sample_angular(m, 40000, 5);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(w.col(j).mean(), 1.0 / 3, 0.005);
}

TEST(Sampling, AtomFrequenciesMatchVertexMasses) {
  const AngularModel m = AngularModel::asym_logistic_exchangeable(1.5, std::vector<double>{0.7, 0.4});
  const int n = 40000;
  const PointMatrix w = sample_angular(m, n, 3);
  int at1 = 0, at2 = 0;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    at1 += w(i, 0) == 1.0;
    at2 += w(i, 1) == 1.0;
  }
  for (auto [count, p] : {std::pair{at1, 0.15}, std::pair{at2, 0.30}})
    EXPECT_NEAR(static_cast<double>(count) / n, p, 4 * std::sqrt(p * (1 - p) / n));
}

TEST(Sampling, KolmogorovSmirnovBivariate) {
  // 1% critical value of sqrt(n) D is 1.628
  const int n = 5000;
  for (const auto& m : {AngularModel::husler_reiss(std::vector<double>{0.65}, 2),
                        AngularModel::husler_reiss(std::vector<double>{2.5}, 2),
                        AngularModel::tilted_dirichlet(std::vector<double>{0.5, 3.0})}) {
    const auto w1 = column(sample_angular(m, n, 17), 0);
    const double d = ks_distance(m, w1);
    EXPECT_LT(std::sqrt(n) * d, 1.628) << family_code(m.family());
  }
}

TEST(Sampling, SecondMomentsMatchQuadrature) {
  const int n = 20000;
  for (const auto& m : {tsup::fitted_hr(), AngularModel::tilted_dirichlet(std::vector<double>{2, 2.5, 30})}) {
    auto f = [&](std::span<const double> w) { return w[0] * w[1] * angular_density(m, w); };
    const double expected = integrate_simplex(f, 3, 1e-7).value;
    const PointMatrix w = sample_angular(m, n, 23);
    const Eigen::ArrayXd prod = w.col(0).array() * w.col(1).array();
    const double mean = prod.mean();
    const double sd = std::sqrt((prod - mean).square().sum() / (n - 1));
    EXPECT_NEAR(mean, expected, 4 * sd / std::sqrt(n)) << family_code(m.family());
  }
}

TEST(Sampling, SamplerDescriptionCoversAllMass) {
  for (const auto& m : {AngularModel::extremal_t(std::vector<double>{0.52, 0.71, 0.52}, 2.0, 3),
                        AngularModel::asym_logistic_exchangeable(1.25, std::vector<double>{0.5, 0.5, 0.5}),
                        tsup::fitted_td()}) {
    const auto info = describe_sampler(m, 1);
    double total = 0;
    for (const auto& f : info) {
      total += f.mass;
      if (subset_size(f.face) == 1) EXPECT_EQ(f.proposal, FaceProposal::Atom);
      else EXPECT_GT(f.expected_acceptance, 0.0);
    }
    EXPECT_NEAR(total, 1.0, 1e-6) << family_code(m.family());
  }
}

TEST(Sampling, AttemptBudgetIsEnforced) {
  SamplingOptions o;
  o.max_attempts_per_draw = 1;
  const AngularModel peaked = AngularModel::tilted_dirichlet(std::vector<double>{2, 2.5, 30});
  EXPECT_THROW(sample_angular(peaked, 2000, 1, o), SamplingError);
}
