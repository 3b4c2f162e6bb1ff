#include "extdep/angular_model.hpp"
#include "extdep/error.hpp"
#include "extdep/mvgauss.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace extdep;
namespace tsup = extdep::testing;

namespace {

std::vector<double> random_interior(std::mt19937_64& rng, int d, double floor = 0.01) {
  std::exponential_distribution<double> e;
  for (;;) {
    std::vector<double> w(d);
    double s = 0;
    for (double& x : w) s += (x = e(rng));
    for (double& x : w) x /= s;
    if (*std::min_element(w.begin(), w.end()) > floor) return w;
  }
}

// Pairwise beta density written out term by term, as an independent check.
double pb_oracle(double alpha, const Eigen::MatrixXd& beta, const std::vector<double>& w) {
  const int d = static_cast<int>(w.size());
  const double c = 2.0 * std::tgamma(d - 2) * std::tgamma(alpha * d + 1) /
                   (d * (d - 1) * std::tgamma(2 * alpha + 1) * std::tgamma(alpha * (d - 2)));
  double s = 0;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const double b = beta(i, j), t = w[i] + w[j];
      const double hstar = std::tgamma(2 * b) / (std::tgamma(b) * std::tgamma(b)) * std::pow(w[i] / t, b - 1) *
                           std::pow(w[j] / t, b - 1);
      s += std::pow(t, 2 * alpha - 1) * std::pow(1 - t, alpha * (d - 2) - d + 2) * hstar;
    }
  }
  return c * s;
}

// Asymmetric logistic face density on the probability scale.
double al_face_oracle(double a, const std::vector<double>& beta, const std::vector<double>& w, int d) {
  const int k = static_cast<int>(w.size());
  double prod = 1, sum = 0;
  for (int i = 1; i < k; ++i) prod *= i * a - 1;
  for (int j = 0; j < k; ++j) {
    prod *= std::pow(beta[j], a) * std::pow(w[j], -(a + 1));
    sum += std::pow(beta[j] / w[j], a);
  }
  return prod * std::pow(sum, 1 / a - k) / d;
}

AsymLogisticParams full_al3() {
  AsymLogisticParams p;
  p.d = 3;
  p.alpha.assign(8, 1.0);
  p.alpha[3] = 1.5;  // {1,2}
  p.alpha[5] = 2.0;  // {1,3}
  p.alpha[6] = 2.5;  // {2,3}
  p.alpha[7] = 3.0;  // {1,2,3}
  p.beta = Eigen::MatrixXd::Zero(8, 3);
  for (Subset S = 1; S < 8; ++S)
    for (int j = 0; j < 3; ++j)
      if (subset_contains(S, j)) p.beta(S, j) = subset_size(S) == 1 ? 0.2 : subset_size(S) == 2 ? 0.2 : 0.4;
  return p;
}

// -(1/d) times the mixed partial derivative of V in every coordinate, by
// central differences; equals the interior density at y = w.
double density_from_exponent(const AngularModel& m, const std::vector<double>& w, double h = 2e-3) {
  const int d = m.dim();
  double acc = 0;
  for (int mask = 0; mask < (1 << d); ++mask) {
    std::vector<double> y = w;
    int neg = 0;
    for (int j = 0; j < d; ++j) {
      if (mask >> j & 1) {
        y[j] -= h;
        ++neg;
      } else {
        y[j] += h;
      }
    }
    acc += (neg % 2 ? -1.0 : 1.0) * exponent_function(m, y);
  }
  return -acc / std::pow(2 * h, d) / d;
}

}  // namespace

TEST(AngularDensity, TiltedDirichletCentre) {
  const AngularModel m = AngularModel::tilted_dirichlet(std::vector<double>{2, 2, 2});
  const std::vector<double> c{1.0 / 3, 1.0 / 3, 1.0 / 3};
  EXPECT_NEAR(angular_density(m, c), 40.0 / 9.0, 1e-12);
}

TEST(AngularDensity, PairwiseBetaMatchesTermByTermFormula) {
  std::mt19937_64 rng(4);
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(3, 3);
  const AngularModel flat = AngularModel::pairwise_beta(1.0, std::vector<double>{1, 1, 1}, 3);
  for (int t = 0; t < 100; ++t) {
    const auto w = random_interior(rng, 3, 1e-4);
    const double v = angular_density(flat, w);
    EXPECT_NEAR(v, pb_oracle(1.0, ones, w), 1e-12 * v);
    EXPECT_NEAR(v, 2.0, 1e-12);
  }
  Eigen::MatrixXd b(4, 4);
  b << 0, 2, 4, 15, 2, 0, 0.7, 3, 4, 0.7, 0, 1.3, 15, 3, 1.3, 0;
  const AngularModel m = AngularModel::pairwise_beta(1.3, std::vector<double>{2, 4, 15, 0.7, 3, 1.3}, 4);
  for (int t = 0; t < 100; ++t) {
    const auto w = random_interior(rng, 4, 1e-3);
    const double v = angular_density(m, w);
    EXPECT_NEAR(v, pb_oracle(1.3, b, w), 1e-11 * v);
  }
}

TEST(AngularDensity, SymmetricParametersArePermutationInvariant) {
  const std::vector<AngularModel> models{
      AngularModel::tilted_dirichlet(std::vector<double>{1.7, 1.7, 1.7}),
      AngularModel::pairwise_beta(0.8, std::vector<double>{2, 2, 2}, 3),
      AngularModel::husler_reiss(std::vector<double>{0.6, 0.6, 0.6}, 3),
      AngularModel::extremal_t(std::vector<double>{0.4, 0.4, 0.4}, 3.0, 3),
      AngularModel::asym_logistic_exchangeable(1.8, std::vector<double>{0.6, 0.6, 0.6})};
  std::mt19937_64 rng(8);
  for (const auto& m : models) {
    for (int t = 0; t < 10; ++t) {
      auto w = random_interior(rng, 3);
      const double base = angular_density(m, w);
      std::sort(w.begin(), w.end());
      do {
        EXPECT_NEAR(angular_density(m, w), base, 1e-12 * base) << family_code(m.family());
      } while (std::next_permutation(w.begin(), w.end()));
    }
  }
}

TEST(AngularDensity, InteriorDensityIsMixedDerivativeOfExponent) {
  std::mt19937_64 rng(12);
  const std::vector<AngularModel> models{
      AngularModel::husler_reiss(std::vector<double>{0.8}, 2),
      AngularModel::husler_reiss(std::vector<double>{0.65, 0.90, 0.98}, 3),
      AngularModel::extremal_t(std::vector<double>{0.3}, 4.0, 2),
      AngularModel::extremal_t(std::vector<double>{0.52, 0.71, 0.52}, 3.0, 3),
      AngularModel::asym_logistic_exchangeable(2.2, std::vector<double>{0.8, 0.5}),
      AngularModel::asym_logistic_exchangeable(1.7, std::vector<double>{0.7, 0.4, 0.9})};
  for (const auto& m : models) {
    for (int t = 0; t < 4; ++t) {
      const auto w = random_interior(rng, m.dim(), 0.15);
      const double h = angular_density(m, w);
      EXPECT_NEAR(density_from_exponent(m, w), h, 1e-4 * std::max(1.0, h)) << family_code(m.family());
    }
  }
}

TEST(AngularDensity, BoundaryPointIsDomainError) {
  const AngularModel m = tsup::fitted_hr();
  EXPECT_THROW(angular_density(m, std::vector<double>{0.0, 0.5, 0.5}), DomainError);
  EXPECT_THROW(angular_density(m, std::vector<double>{0.2, 0.5, 0.5}), ValidationError);
}

TEST(FaceDensity, BivariateAsymmetricLogistic) {
  const double a = 2.0, b1 = 1.0, b2 = 1.0;
  const AngularModel m = AngularModel::asym_logistic_exchangeable(a, std::vector<double>{b1, b2});
  const std::vector<double> w{0.5, 0.5};
  // (a-1)(b1 b2)^a {w(1-w)}^(a-2) [(b1(1-w))^a + (b2 w)^a]^(1/a-2), halved for the probability scale
  const double total_scale = (a - 1) * std::pow(b1 * b2, a) * std::pow(0.25, a - 2) *
                             std::pow(std::pow(b1 * 0.5, a) + std::pow(b2 * 0.5, a), 1 / a - 2);
  EXPECT_NEAR(face_density(m, full_set(2), w), total_scale / 2, 1e-13);
  EXPECT_NEAR(total_scale / 2, std::sqrt(2.0), 1e-13);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  const AngularModel m2 = AngularModel::asym_logistic_exchangeable(1.6, std::vector<double>{0.7, 0.35});
  for (int t = 0; t < 20; ++t) {
    const double x = u(rng);
    const std::vector<double> p{x, 1 - x};
    EXPECT_NEAR(angular_density(m2, p), al_face_oracle(1.6, {0.7, 0.35}, p, 2),
                1e-12 * angular_density(m2, p));
  }
}

TEST(FaceDensity, FullAsymmetricLogisticFaces) {
  const AngularModel m{full_al3()};
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  const double alphas[8] = {0, 0, 0, 1.5, 0, 2.0, 2.5, 3.0};
  for (Subset S : {Subset{3}, Subset{5}, Subset{6}}) {
    const double x = u(rng);
    std::vector<double> w(3, 0.0), wf;
    int first = -1;
    for (int j = 0; j < 3; ++j) {
      if (!subset_contains(S, j)) continue;
      w[j] = first < 0 ? x : 1 - x;
      if (first < 0) first = j;
      wf.push_back(w[j]);
    }
    EXPECT_NEAR(face_density(m, S, w), al_face_oracle(alphas[S], {0.2, 0.2}, wf, 3), 1e-12);
  }
  const auto w = std::vector<double>{0.2, 0.3, 0.5};
  EXPECT_NEAR(face_density(m, 7, w), al_face_oracle(3.0, {0.4, 0.4, 0.4}, w, 3), 1e-12);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(vertex_mass(m, j), 0.2 / 3, 1e-15);
}

TEST(FaceDensity, ZeroWeightKillsFace) {
  auto p = full_al3();
  p.beta(3, 0) = 0.0;  // j = 1 leaves face {1,2}
  p.beta(1, 0) = 0.4;
  const AngularModel m{p};
  EXPECT_EQ(face_density(m, 3, std::vector<double>{0.4, 0.6, 0.0}), 0.0);
}

TEST(FaceDensity, UnsupportedFaces) {
  const AngularModel hr = tsup::fitted_hr();
  EXPECT_THROW(face_density(hr, 3, std::vector<double>{0.5, 0.5, 0.0}), UnsupportedError);
  EXPECT_FALSE(face_supported(hr, 3));
  EXPECT_TRUE(face_supported(hr, 7));
  EXPECT_TRUE(face_supported(AngularModel{full_al3()}, 5));
}

TEST(VertexMass, AsymmetricLogisticBivariate) {
  const AngularModel m = AngularModel::asym_logistic_exchangeable(1.5, std::vector<double>{0.7, 0.4});
  // 1 - beta_j on the total-mass-d scale, halved on the probability scale
  EXPECT_NEAR(vertex_mass(m, 0), 0.15, 1e-15);
  EXPECT_NEAR(vertex_mass(m, 1), 0.30, 1e-15);
  EXPECT_NEAR(face_density(m, 1, std::vector<double>{1.0, 0.0}), 0.15, 1e-15);
}

TEST(VertexMass, ExtremalTIndependentCorrelation) {
  for (double nu : {0.7, 2.0, 15.0}) {
    const AngularModel m = AngularModel::extremal_t(std::vector<double>{0.0}, nu, 2);
    EXPECT_NEAR(vertex_mass(m, 0), 0.25, 1e-12);
    EXPECT_NEAR(vertex_mass(m, 1), 0.25, 1e-12);
  }
}

TEST(VertexMass, ExtremalTTrivariateFormula) {
  const double nu = 3.0;
  const auto R = CorrelationMatrix::from_upper(3, std::vector<double>{0.52, 0.71, 0.52});
  const AngularModel m = AngularModel::extremal_t(std::vector<double>{0.52, 0.71, 0.52}, nu, 3);
  for (int j = 0; j < 3; ++j) {
    std::vector<double> upper;
    for (int i = 0; i < 3; ++i)
      if (i != j) upper.push_back(-R(i, j) * std::sqrt(nu + 1) / std::sqrt(1 - R(i, j) * R(i, j)));
    const double expected = mvt_cdf(upper, partial_corr_et(R, j), nu + 1) / 3;
    EXPECT_NEAR(vertex_mass(m, j), expected, 1e-9);
  }
}

TEST(VertexMass, AbsolutelyContinuousFamilies) {
  for (const auto& m : {tsup::fitted_hr(), tsup::fitted_td(),
                        AngularModel::pairwise_beta(1, std::vector<double>{2, 4, 15}, 3)})
    for (int j = 0; j < 3; ++j) EXPECT_EQ(vertex_mass(m, j), 0.0);
}

TEST(MassDecomposition, SumsToOne) {
  for (const auto& [label, m] : tsup::illustration_models()) {
    double total = 0;
    for (const auto& f : mass_decomposition(m)) total += f.mass;
    EXPECT_NEAR(total, 1.0, 1e-6) << label;
  }
}

TEST(Moments, LowAndHighDimensions) {
  const std::vector<AngularModel> models{
      AngularModel::husler_reiss(std::vector<double>{0.7, 0.8, 0.9, 0.75, 0.85, 0.8}, 4),
      AngularModel::tilted_dirichlet(std::vector<double>{0.8, 1.5, 3.0, 0.6}),
      AngularModel::pairwise_beta(1.5, std::vector<double>{2, 1, 3, 0.5, 4, 2}, 4),
      AngularModel::extremal_t(std::vector<double>{0.4}, 2.5, 2),
      AngularModel::asym_logistic_exchangeable(1.3, std::vector<double>{0.6, 0.3}),
      AngularModel::asym_logistic_exchangeable(2.0, std::vector<double>{0.5, 0.8, 0.2, 0.9}),
      AngularModel{full_al3()}};
  for (const auto& m : models) {
    const Eigen::VectorXd mom = angular_moments(m, 1e-6);
    for (int j = 0; j < m.dim(); ++j) EXPECT_NEAR(mom[j], 1.0 / m.dim(), 1e-4) << family_code(m.family());
  }
}

TEST(AngularModel, ParameterRoundTrip) {
  for (const auto& [label, m] : tsup::illustration_models()) {
    const auto theta = m.parameters();
    EXPECT_EQ(theta.size(), m.parameter_names().size());
    const AngularModel back = AngularModel::from_parameters(m.family(), m.dim(), theta);
    EXPECT_EQ(back.parameters(), theta) << label;
  }
  const AngularModel full{full_al3()};
  EXPECT_EQ(AngularModel::from_parameters(Family::AsymLogistic, 3, full.parameters()).parameters(),
            full.parameters());
  EXPECT_THROW(AngularModel::from_parameters(Family::HuslerReiss, 3, std::vector<double>{1, 2}), ValidationError);
}

TEST(AngularModel, AsymmetricLogisticParameterCount) {
  AsymLogisticParams p;
  p.d = 2;
  EXPECT_EQ(p.free_parameter_count(), 3);
  p.d = 3;
  EXPECT_EQ(p.free_parameter_count(), 13);
  p.d = 4;
  EXPECT_EQ(p.free_parameter_count(), 39);
}

TEST(AngularModel, ConstraintViolations) {
  EXPECT_THROW(AngularModel::tilted_dirichlet(std::vector<double>{1, -1, 2}), ValidationError);
  EXPECT_THROW(AngularModel::pairwise_beta(1, std::vector<double>{1}, 2), ValidationError);
  EXPECT_THROW(AngularModel::pairwise_beta(-1, std::vector<double>{1, 1, 1}, 3), ValidationError);
  EXPECT_THROW(AngularModel::husler_reiss(std::vector<double>{0.5, 0.0, 0.5}, 3), ValidationError);
  EXPECT_THROW(AngularModel::extremal_t(std::vector<double>{1.0}, 2.0, 2), ValidationError);
  EXPECT_THROW(AngularModel::extremal_t(std::vector<double>{0.3}, 0.0, 2), ValidationError);
  EXPECT_THROW(AngularModel::extremal_t(std::vector<double>{0.9, -0.9, 0.9}, 2.0, 3), ValidationError);
  EXPECT_THROW(AngularModel::asym_logistic_exchangeable(0.9, std::vector<double>{0.5, 0.5}), ValidationError);
  EXPECT_THROW(AngularModel::asym_logistic_exchangeable(2, std::vector<double>{1.5, 0.5}), ValidationError);
  auto p = full_al3();
  p.beta(7, 0) = 0.5;  // row of coordinate 1 no longer sums to one
  EXPECT_THROW(AngularModel{p}, ValidationError);
  EXPECT_THROW(AngularModel::tilted_dirichlet(std::vector<double>{1, 1, 1, 1, 1}), UnsupportedError);
}

TEST(AngularModel, FamilyCodes) {
  EXPECT_EQ(parse_family("HR"), Family::HuslerReiss);
  EXPECT_EQ(parse_family("td"), Family::TiltedDirichlet);
  EXPECT_EQ(parse_family(family_name(Family::ExtremalT)), Family::ExtremalT);
  EXPECT_THROW(parse_family("XX"), ValidationError);
}
