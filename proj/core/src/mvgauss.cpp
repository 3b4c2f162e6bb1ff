#include "extdep/mvgauss.hpp"

#include "extdep/error.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace extdep {

namespace {

using ignore_overflow =
    boost::math::policies::policy<boost::math::policies::overflow_error<boost::math::policies::ignore_error>>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDegenerate = 1e-7;
constexpr double kQuantileClamp = 1e8;

void check_dim(std::size_t n, const CorrelationMatrix& corr) {
  if (static_cast<int>(n) != corr.dim())
    throw ValidationError("dimension of limits does not match correlation matrix");
  if (n == 0 || n > 4) throw UnsupportedError("CDF dimension must be between 1 and 4");
}

// Bivariate upper orthant P(X > h, Y > k), after Genz's BVNU (Drezner and
// Wesolowsky with Gauss-Legendre rules chosen by |r|).
template <int N>
void legendre_half(std::vector<double>& x, std::vector<double>& w) {
  using rule = boost::math::quadrature::gauss<double, N>;
  for (std::size_t i = 0; i < rule::abscissa().size(); ++i) {
    if (rule::abscissa()[i] == 0.0) continue;
    x.push_back(-rule::abscissa()[i]);
    w.push_back(rule::weights()[i]);
  }
}

struct LegendreTables {
  std::vector<double> x[3], w[3];
  LegendreTables() {
    legendre_half<6>(x[0], w[0]);
    legendre_half<12>(x[1], w[1]);
    legendre_half<20>(x[2], w[2]);
  }
};

const LegendreTables& tables() {
  static const LegendreTables t;
  return t;
}

double bvnu(double h, double k, double r) {
  constexpr double twopi = 2.0 * std::numbers::pi;
  const auto& tab = tables();
  const int ng = std::abs(r) < 0.3 ? 0 : (std::abs(r) < 0.75 ? 1 : 2);
  const auto& xs = tab.x[ng];
  const auto& ws = tab.w[ng];
  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double sn = std::sin(asr * (1.0 - xs[i]) / 2.0);
      bvn += ws[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (1.0 + xs[i]) / 2.0);
      bvn += ws[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * twopi) + normal_cdf(-h) * normal_cdf(-k);
  }
  if (r < 0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    double asr = -(bs / as + hk) / 2.0;
    if (asr > -100.0)
      bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (-hk < 100.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(twopi) * normal_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (double sgn : {-1.0, 1.0}) {
        const double xsq = (a * (sgn * xs[i] + 1.0)) * (a * (sgn * xs[i] + 1.0));
        const double rs = std::sqrt(1.0 - xsq);
        asr = -(bs / xsq + hk) / 2.0;
        if (asr > -100.0)
          bvn += a * ws[i] * std::exp(asr) *
                 (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs - (1.0 + c * xsq * (1.0 + d * xsq)));
      }
    }
    bvn = -bvn / twopi;
  }
  if (r > 0) return bvn + normal_cdf(-std::max(h, k));
  bvn = -bvn;
  if (k > h) bvn += normal_cdf(k) - normal_cdf(h);
  return bvn;
}

struct Marginal {
  double df;  // +inf for the normal
  bool normal() const { return std::isinf(df); }
  double cdf(double x) const { return normal() ? normal_cdf(x) : student_t_cdf(x, df); }
  double quantile(double u) const {
    double t;
    if (normal()) {
      t = normal_quantile(u);
    } else {
      if (u <= 0.0) return -kQuantileClamp;
      if (u >= 1.0) return kQuantileClamp;
      t = boost::math::quantile(boost::math::students_t_distribution<double, ignore_overflow>(df), u);
    }
    return std::clamp(t, -kQuantileClamp, kQuantileClamp);
  }
};

// Orthant probability by conditioning on the most restrictive coordinate and
// integrating the remaining lower-dimensional probability over its quantile
// scale. Given X_k = t, the others are again normal (or t with df+1 and
// scale inflated by sqrt((df + t^2)/(df + 1))) with partial correlations.
double orthant(std::vector<double> a, Eigen::MatrixXd R, double df) {
  // drop +inf, short-circuit -inf
  std::vector<int> keep;
  for (int i = 0; i < static_cast<int>(a.size()); ++i) {
    if (std::isnan(a[i])) throw NumericError("NaN integration limit");
    if (a[i] == -kInf) return 0.0;
    if (a[i] != kInf) keep.push_back(i);
  }
  if (keep.size() != a.size()) {
    std::vector<double> a2;
    Eigen::MatrixXd R2(keep.size(), keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      a2.push_back(a[keep[i]]);
      for (std::size_t j = 0; j < keep.size(); ++j) R2(i, j) = R(keep[i], keep[j]);
    }
    a = std::move(a2);
    R = std::move(R2);
  }
  const int n = static_cast<int>(a.size());
  const Marginal marg{df};
  if (n == 0) return 1.0;
  if (n == 1) return marg.cdf(a[0]);
  if (n == 2 && marg.normal()) return bvn_cdf(a[0], a[1], R(0, 1));

  const int k = static_cast<int>(std::min_element(a.begin(), a.end()) - a.begin());
  double t_lo = -kInf, t_hi = a[k];
  std::vector<int> rest;
  std::vector<double> r, s;
  for (int i = 0; i < n; ++i) {
    if (i == k) continue;
    const double ri = R(k, i);
    const double si = std::sqrt(std::max(0.0, 1.0 - ri * ri));
    if (si < kDegenerate) {
      // X_i = r_i X_k almost surely
      if (ri > 0) t_hi = std::min(t_hi, a[i] / ri);
      else t_lo = std::max(t_lo, a[i] / ri);
      continue;
    }
    rest.push_back(i);
    r.push_back(ri);
    s.push_back(si);
  }
  if (t_hi <= t_lo) return 0.0;
  const int m = static_cast<int>(rest.size());
  Eigen::MatrixXd C(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j)
      C(i, j) = i == j ? 1.0 : (R(rest[i], rest[j]) - r[i] * r[j]) / (s[i] * s[j]);
  }
  const double u_lo = t_lo == -kInf ? 0.0 : marg.cdf(t_lo);
  const double u_hi = marg.cdf(t_hi);
  if (u_hi <= u_lo) return 0.0;
  if (m == 0) return u_hi - u_lo;
  const double next_df = marg.normal() ? df : df + 1.0;

  auto integrand = [&](double u) {
    const double t = marg.quantile(u);
    const double g = marg.normal() ? 1.0 : std::sqrt((df + t * t) / (df + 1.0));
    std::vector<double> b(m);
    for (int i = 0; i < m; ++i) b[i] = (a[rest[i]] - r[i] * t) / (s[i] * g);
    return orthant(b, C, next_df);
  };
  boost::math::quadrature::tanh_sinh<double> ts(12);
  double err = 0.0;
  const double val = ts.integrate(integrand, u_lo, u_hi, 1e-10, &err);
  return std::clamp(val, 0.0, 1.0);
}

std::vector<double> to_vec(std::span<const double> x) { return {x.begin(), x.end()}; }

QmcResult qmc_orthant(std::span<const double> upper, const CorrelationMatrix& corr, double df,
                      const CdfOptions& opts) {
  check_dim(upper.size(), corr);
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(upper.size()); ++i) {
    if (upper[i] == -kInf) return {0.0, 0.0, 0};
    if (upper[i] != kInf) idx.push_back(i);
  }
  const bool normal = std::isinf(df);
  if (idx.empty()) return {1.0, 0.0, 0};
  // most restrictive limits first
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return upper[i] < upper[j]; });
  const int n = static_cast<int>(idx.size());
  Eigen::MatrixXd R(n, n);
  Eigen::VectorXd a(n);
  for (int i = 0; i < n; ++i) {
    a(i) = upper[idx[i]];
    for (int j = 0; j < n; ++j) R(i, j) = corr(idx[i], idx[j]);
  }
  // Cholesky tolerant of zero pivots
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double dsum = R(j, j);
    for (int k = 0; k < j; ++k) dsum -= L(j, k) * L(j, k);
    const double piv = dsum > 1e-14 ? std::sqrt(dsum) : 0.0;
    L(j, j) = piv;
    for (int i = j + 1; i < n; ++i) {
      double v = R(i, j);
      for (int k = 0; k < j; ++k) v -= L(i, k) * L(j, k);
      L(i, j) = piv > 0 ? v / piv : 0.0;
    }
  }
  const int ndim = (n - 1) + (normal ? 0 : 1);
  if (ndim == 0) return {normal_cdf(a(0)), 0.0, 1};

  auto integrand = [&](const double* u) {
    double scale = 1.0;
    int pos = 0;
    if (!normal) {
      const double q = std::clamp(u[pos++], 1e-300, 1.0 - 1e-16);
      scale = std::sqrt(2.0 * boost::math::gamma_p_inv(df / 2.0, q) / df);
    }
    std::array<double, 4> y{};
    double prod = 1.0;
    for (int i = 0; i < n; ++i) {
      double lim = scale * a(i);
      for (int k = 0; k < i; ++k) lim -= L(i, k) * y[k];
      double e;
      if (L(i, i) > 0) {
        e = normal_cdf(lim / L(i, i));
      } else {
        e = lim >= 0 ? 1.0 : 0.0;
      }
      prod *= e;
      if (prod == 0.0) return 0.0;
      if (i + 1 < n) y[i] = L(i, i) > 0 ? normal_quantile(std::clamp(u[pos++] * e, 1e-300, 1.0 - 1e-16)) : 0.0;
    }
    return prod;
  };

  static constexpr std::array<double, 5> primes{2, 3, 5, 7, 11};
  std::vector<double> z(ndim);
  for (int j = 0; j < ndim; ++j) z[j] = std::fmod(std::sqrt(primes[j]), 1.0);
  constexpr int shifts = 12;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<double>> delta(shifts, std::vector<double>(ndim));
  for (auto& dv : delta)
    for (auto& v : dv) v = unif(rng);

  std::vector<double> sums(shifts, 0.0);
  std::size_t done = 0;
  std::size_t target = 512;
  double estimate = 0.0, se = 0.0;
  std::vector<double> u(ndim), uc(ndim);
  while (true) {
    for (int sft = 0; sft < shifts; ++sft) {
      for (std::size_t kpt = done + 1; kpt <= target; ++kpt) {
        for (int j = 0; j < ndim; ++j) {
          const double x = std::fmod(static_cast<double>(kpt) * z[j] + delta[sft][j], 1.0);
          u[j] = std::abs(2.0 * x - 1.0);
          uc[j] = 1.0 - u[j];
        }
        sums[sft] += 0.5 * (integrand(u.data()) + integrand(uc.data()));
      }
    }
    done = target;
    double mean = 0.0;
    for (double sv : sums) mean += sv / static_cast<double>(done);
    mean /= shifts;
    double var = 0.0;
    for (double sv : sums) var += (sv / static_cast<double>(done) - mean) * (sv / static_cast<double>(done) - mean);
    var /= shifts * (shifts - 1.0);
    estimate = mean;
    se = std::sqrt(var);
    if (3.5 * se < opts.tol) break;
    if (target * 2 * shifts > opts.max_points) {
      throw NumericError("lattice rule did not reach tolerance", std::clamp(estimate, 0.0, 1.0), se);
    }
    target *= 2;
  }
  return {std::clamp(estimate, 0.0, 1.0), se, done * shifts};
}

}  // namespace

CorrelationMatrix::CorrelationMatrix(const Eigen::MatrixXd& m) : m_(m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw ValidationError("correlation matrix must be square and nonempty");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!std::isfinite(m(i, i)) || std::abs(m(i, i) - 1.0) > 1e-12)
      throw ValidationError("correlation matrix diagonal must be 1");
    m_(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      if (!std::isfinite(m(i, j)) || std::abs(m(i, j) - m(j, i)) > 1e-12)
        throw ValidationError("correlation matrix must be symmetric");
      if (std::abs(m(i, j)) > 1.0 + 1e-12) throw ValidationError("correlation entries must lie in [-1, 1]");
      const double v = std::clamp(0.5 * (m(i, j) + m(j, i)), -1.0, 1.0);
      m_(i, j) = m_(j, i) = v;
    }
  }
  if (m_.rows() == 1) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin < -1e-10) throw NumericError("correlation matrix is not positive semidefinite", lmin, 0.0);
  if (lmin < 0.0) {
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd clipped = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    Eigen::VectorXd dg = clipped.diagonal().cwiseSqrt().cwiseInverse();
    m_ = dg.asDiagonal() * clipped * dg.asDiagonal();
    m_.diagonal().setOnes();
  }
}

CorrelationMatrix CorrelationMatrix::identity(int dim) { return CorrelationMatrix(Eigen::MatrixXd::Identity(dim, dim)); }

CorrelationMatrix CorrelationMatrix::from_upper(int dim, std::span<const double> upper) {
  if (static_cast<int>(upper.size()) != dim * (dim - 1) / 2)
    throw ValidationError("wrong number of correlation entries");
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(dim, dim);
  std::size_t p = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) m(i, j) = m(j, i) = upper[p++];
  return CorrelationMatrix(m);
}

double CorrelationMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

CorrelationMatrix CorrelationMatrix::submatrix(std::span<const int> index) const {
  const auto n = static_cast<Eigen::Index>(index.size());
  Eigen::MatrixXd s(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) s(i, j) = m_(index[i], index[j]);
  CorrelationMatrix out;
  out.m_ = s;
  return out;
}

double normal_cdf(double x) { return 0.5 * boost::math::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  if (p < 0.5) return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * (1.0 - p));
}

double student_t_cdf(double x, double df) {
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return boost::math::cdf(boost::math::students_t_distribution<double>(df), x);
}

double student_t_quantile(double p, double df) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  return boost::math::quantile(boost::math::students_t_distribution<double, ignore_overflow>(df), p);
}

double bvn_cdf(double h, double k, double rho) {
  if (std::isnan(h) || std::isnan(k)) throw NumericError("NaN integration limit");
  if (h == -kInf || k == -kInf) return 0.0;
  if (h == kInf) return normal_cdf(k);
  if (k == kInf) return normal_cdf(h);
  return std::clamp(bvnu(-h, -k, rho), 0.0, 1.0);
}

double mvn_cdf(std::span<const double> upper, const CorrelationMatrix& corr, const CdfOptions&) {
  check_dim(upper.size(), corr);
  return orthant(to_vec(upper), corr.matrix(), kInf);
}

double mvt_cdf(std::span<const double> upper, const CorrelationMatrix& corr, double df, const CdfOptions&) {
  check_dim(upper.size(), corr);
  if (!(df > 0)) throw ValidationError("degrees of freedom must be positive");
  return orthant(to_vec(upper), corr.matrix(), df);
}

double mvn_survival(std::span<const double> lower, const CorrelationMatrix& corr, const CdfOptions& opts) {
  std::vector<double> neg(lower.size());
  std::transform(lower.begin(), lower.end(), neg.begin(), [](double v) { return -v; });
  return mvn_cdf(neg, corr, opts);
}

double mvt_survival(std::span<const double> lower, const CorrelationMatrix& corr, double df,
                    const CdfOptions& opts) {
  std::vector<double> neg(lower.size());
  std::transform(lower.begin(), lower.end(), neg.begin(), [](double v) { return -v; });
  return mvt_cdf(neg, corr, df, opts);
}

QmcResult mvn_cdf_qmc(std::span<const double> upper, const CorrelationMatrix& corr, const CdfOptions& opts) {
  return qmc_orthant(upper, corr, kInf, opts);
}

QmcResult mvt_cdf_qmc(std::span<const double> upper, const CorrelationMatrix& corr, double df,
                      const CdfOptions& opts) {
  if (!(df > 0)) throw ValidationError("degrees of freedom must be positive");
  return qmc_orthant(upper, corr, df, opts);
}

double mvn_log_pdf(std::span<const double> x, const CorrelationMatrix& corr) {
  if (static_cast<int>(x.size()) != corr.dim()) throw ValidationError("dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(corr.matrix());
  if (llt.info() != Eigen::Success) throw NumericError("singular correlation matrix");
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  Eigen::VectorXd sol = llt.matrixL().solve(v);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double n = static_cast<double>(x.size());
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + logdet + sol.squaredNorm());
}

double mvt_log_pdf(std::span<const double> x, const CorrelationMatrix& corr, double df) {
  if (static_cast<int>(x.size()) != corr.dim()) throw ValidationError("dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(corr.matrix());
  if (llt.info() != Eigen::Success) throw NumericError("singular correlation matrix");
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  Eigen::VectorXd sol = llt.matrixL().solve(v);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double n = static_cast<double>(x.size());
  return std::lgamma((df + n) / 2.0) - std::lgamma(df / 2.0) - 0.5 * n * std::log(df * std::numbers::pi) -
         0.5 * logdet - 0.5 * (df + n) * std::log1p(sol.squaredNorm() / df);
}

CorrelationMatrix partial_corr_hr(const Eigen::MatrixXd& lambda, int j) {
  const int d = static_cast<int>(lambda.rows());
  if (lambda.cols() != d || d < 2) throw ValidationError("lambda must be a square matrix of size >= 2");
  if (j < 0 || j >= d) throw ValidationError("conditioning index out of range");
  std::vector<int> others;
  for (int i = 0; i < d; ++i)
    if (i != j) others.push_back(i);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d - 1, d - 1);
  for (int a = 0; a < d - 1; ++a) {
    for (int b = 0; b < a; ++b) {
      const double lkj = lambda(others[a], j), lij = lambda(others[b], j), lki = lambda(others[a], others[b]);
      if (!(lkj > 0) || !(lij > 0) || !(lki > 0)) throw ValidationError("lambda entries must be positive");
      m(a, b) = m(b, a) = (lkj * lkj + lij * lij - lki * lki) / (2.0 * lkj * lij);
    }
  }
  try {
    return CorrelationMatrix(m);
  } catch (const Error& e) {
    throw ValidationError(std::string("invalid Husler-Reiss lambda configuration: ") + e.what());
  }
}

CorrelationMatrix partial_corr_et(const CorrelationMatrix& rho, int j) {
  const int d = rho.dim();
  if (j < 0 || j >= d) throw ValidationError("conditioning index out of range");
  std::vector<int> others;
  for (int i = 0; i < d; ++i)
    if (i != j) others.push_back(i);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d - 1, d - 1);
  for (int a = 0; a < d - 1; ++a) {
    const double rkj = rho(others[a], j);
    if (std::abs(rkj) >= 1.0) throw DomainError("partial correlation undefined for |rho| = 1");
    for (int b = 0; b < a; ++b) {
      const double rij = rho(others[b], j);
      if (std::abs(rij) >= 1.0) throw DomainError("partial correlation undefined for |rho| = 1");
      m(a, b) = m(b, a) = (rho(others[a], others[b]) - rkj * rij) / std::sqrt((1.0 - rkj * rkj) * (1.0 - rij * rij));
    }
  }
  return CorrelationMatrix(m);
}

}  // namespace extdep
