#include "extdep/angular_model.hpp"
#include "extdep/error.hpp"
#include "logistic_quadrature.hpp"
#include "model_cache.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

namespace extdep {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

std::vector<int> members(Subset S, int d) {
  std::vector<int> out;
  for (int j = 0; j < d; ++j)
    if (subset_contains(S, j)) out.push_back(j);
  return out;
}

// Asymmetric logistic component on face S (H scale).
double al_log_face(const AngularModel& m, Subset S, std::span<const double> logw) {
  const auto& q = m.as<AsymLogisticParams>();
  const auto idx = members(S, m.dim());
  const int k = static_cast<int>(idx.size());
  const double a = q.alpha[S];
  if (a <= 1.0) return kNegInf;  // mass sits on the vertices instead
  double out = -m.cache().log_d;
  for (int i = 1; i < k; ++i) out += std::log(i * a - 1.0);
  std::vector<double> terms(k);
  for (int t = 0; t < k; ++t) {
    const double b = q.beta(S, idx[t]);
    if (b <= 0.0) return kNegInf;
    const double lb = std::log(b);
    out += a * lb - (a + 1.0) * logw[t];
    terms[t] = a * (lb - logw[t]);
  }
  return out + (1.0 / a - k) * detail::log_sum_exp(terms);
}

double td_log_density(const AngularModel& m, std::span<const double> logw) {
  const auto& a = m.as<TiltedDirichletParams>().alpha;
  const int d = m.dim();
  std::vector<double> t(d);
  for (int j = 0; j < d; ++j) t[j] = std::log(a(j)) + logw[j];
  const double L = detail::log_sum_exp(t);
  double out = m.cache().td_log_const - (d + 1.0) * L;
  for (int j = 0; j < d; ++j) out += (a(j) - 1.0) * (t[j] - L);
  return out;
}

double pb_log_density(const AngularModel& m, std::span<const double> logw) {
  const auto& q = m.as<PairwiseBetaParams>();
  const int d = m.dim();
  const double a = q.alpha;
  const double e_rest = a * (d - 2.0) - d + 2.0;
  const auto pairs = pair_list(d);
  std::vector<double> terms;
  terms.reserve(pairs.size());
  std::vector<double> rest;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    const double ls = detail::log_sum_exp(std::vector<double>{logw[i], logw[j]});
    rest.clear();
    for (int k = 0; k < d; ++k)
      if (k != i && k != j) rest.push_back(logw[k]);
    const double lr = detail::log_sum_exp(rest);
    const double b = q.beta(i, j);
    terms.push_back((2.0 * a - 1.0) * ls + e_rest * lr + m.cache().pb_pair_const[p] + (b - 1.0) * (logw[i] - ls) +
                    (b - 1.0) * (logw[j] - ls));
  }
  return m.cache().pb_log_const + detail::log_sum_exp(terms);
}

double quad_form_inv(const Eigen::MatrixXd& chol_inv, const Eigen::VectorXd& x) {
  return (chol_inv.triangularView<Eigen::Lower>() * x).squaredNorm();
}

double hr_log_density(const AngularModel& m, std::span<const double> logw) {
  const auto& c = m.cache();
  if (!c.density_ok) throw NumericError("Husler-Reiss conditional correlation is singular; no interior density");
  const auto& lam = m.as<HuslerReissParams>().lambda;
  const int d = m.dim();
  Eigen::VectorXd x(d - 1);
  double out = -c.log_d - 2.0 * logw[0];
  for (int i = 1; i < d; ++i) {
    const double l = lam(i, 0);
    x(i - 1) = l + (logw[i] - logw[0]) / (2.0 * l);
    out -= logw[i] + std::log(2.0 * l);
  }
  out += -0.5 * ((d - 1) * kLog2Pi + c.logdet0 + quad_form_inv(c.chol0_inv, x));
  return out;
}

double et_log_density(const AngularModel& m, std::span<const double> logw) {
  const auto& c = m.cache();
  if (!c.density_ok) throw NumericError("extremal-t conditional correlation is singular; no interior density");
  const auto& q = m.as<ExtremalTParams>();
  const int d = m.dim();
  const double nu = q.nu;
  const double df = nu + 1.0;
  const double n = d - 1.0;
  Eigen::VectorXd x(d - 1);
  double out = -c.log_d - (d + 1.0) * logw[0] - n * std::log(nu);
  for (int i = 1; i < d; ++i) {
    const double r = q.rho(i, 0);
    const double lci = 0.5 * (std::log(df) - std::log1p(-r * r));
    const double lratio = logw[i] - logw[0];
    if (lratio / nu > 700.0) return kNegInf;  // t kernel underflows long before this
    x(i - 1) = std::exp(lci) * (std::exp(lratio / nu) - r);
    out += lci - (nu - 1.0) / nu * lratio;
  }
  const double qf = quad_form_inv(c.chol0_inv, x);
  out += std::lgamma((df + n) / 2.0) - std::lgamma(df / 2.0) - 0.5 * n * std::log(df * std::numbers::pi) -
         0.5 * c.logdet0 - 0.5 * (df + n) * std::log1p(qf / df);
  return out;
}

// Extremal-t face density from the spectral representation
// W_j = (Z_j^+)^nu / m_nu, Z ~ N(0, rho). Works for every face size k.
double et_log_face(const AngularModel& m, Subset S, std::span<const double> logw) {
  const auto& q = m.as<ExtremalTParams>();
  const int d = m.dim();
  const double nu = q.nu;
  const auto in = members(S, d);
  const int k = static_cast<int>(in.size());
  std::vector<int> out_idx;
  for (int j = 0; j < d; ++j)
    if (!subset_contains(S, j)) out_idx.push_back(j);
  const Eigen::MatrixXd& R = q.rho.matrix();
  Eigen::MatrixXd Rss(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) Rss(a, b) = R(in[a], in[b]);
  Eigen::LLT<Eigen::MatrixXd> llt(Rss);
  if (llt.info() != Eigen::Success) throw NumericError("singular correlation block in extremal-t face density");
  Eigen::VectorXd av(k);
  double res = -m.cache().log_d;
  for (int t = 0; t < k; ++t) {
    av(t) = std::exp(logw[t] / nu);
    res += (1.0 / nu - 1.0) * logw[t];
  }
  const Eigen::VectorXd sol = llt.solve(av);
  const double Q = av.dot(sol);
  const double logdet = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  const double n = k + nu;
  const double log_m = (nu / 2.0 - 1.0) * std::log(2.0) + std::lgamma((nu + 1.0) / 2.0) - 0.5 * std::log(std::numbers::pi);
  res += (1.0 - k) * std::log(nu) - log_m - 0.5 * k * kLog2Pi - 0.5 * logdet + (n / 2.0 - 1.0) * std::log(2.0) +
         std::lgamma(n / 2.0) - (n / 2.0) * std::log(Q);
  const int r = d - k;
  if (r == 0) return res;
  Eigen::MatrixXd Rcs(r, k), Rcc(r, r);
  for (int a = 0; a < r; ++a) {
    for (int b = 0; b < k; ++b) Rcs(a, b) = R(out_idx[a], in[b]);
    for (int b = 0; b < r; ++b) Rcc(a, b) = R(out_idx[a], out_idx[b]);
  }
  const Eigen::MatrixXd B = llt.solve(Rcs.transpose()).transpose();  // r x k
  Eigen::MatrixXd cond = Rcc - B * Rcs.transpose();
  const Eigen::VectorXd mean = B * av;
  std::vector<double> upper(r);
  Eigen::VectorXd sd = cond.diagonal().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(r, r);
  for (int a = 0; a < r; ++a) {
    if (sd(a) < 1e-12) {
      // degenerate conditional component: it equals its mean almost surely
      if (mean(a) > 0) return kNegInf;
      upper[a] = std::numeric_limits<double>::infinity();
      continue;
    }
    upper[a] = -mean(a) / sd(a) * std::sqrt(n / Q);
    for (int b = 0; b < a; ++b)
      if (sd(b) >= 1e-12) corr(a, b) = corr(b, a) = cond(a, b) / (sd(a) * sd(b));
  }
  const double p = mvt_cdf(upper, CorrelationMatrix(corr), n);
  if (p <= 0.0) return kNegInf;
  return res + std::log(p);
}

void check_interior(std::span<const double> w, int d) {
  if (static_cast<int>(w.size()) != d) throw ValidationError("point has the wrong dimension");
  double s = 0.0;
  for (double x : w) {
    if (!std::isfinite(x)) throw ValidationError("point has non-finite coordinates");
    if (x <= 0.0) throw DomainError("point is not in the interior of the simplex");
    s += x;
  }
  if (std::abs(s - 1.0) > 1e-9) throw ValidationError("point does not lie on the unit simplex");
}

}  // namespace

double log_angular_density_logw(const AngularModel& m, std::span<const double> logw) {
  switch (m.family()) {
    case Family::AsymLogistic: return al_log_face(m, full_set(m.dim()), logw);
    case Family::TiltedDirichlet: return td_log_density(m, logw);
    case Family::PairwiseBeta: return pb_log_density(m, logw);
    case Family::HuslerReiss: return hr_log_density(m, logw);
    case Family::ExtremalT: return et_log_density(m, logw);
  }
  return kNegInf;
}

double log_angular_density(const AngularModel& m, std::span<const double> w) {
  check_interior(w, m.dim());
  std::vector<double> lw(w.size());
  std::transform(w.begin(), w.end(), lw.begin(), [](double x) { return std::log(x); });
  return log_angular_density_logw(m, lw);
}

double angular_density(const AngularModel& m, std::span<const double> w) {
  return std::exp(log_angular_density(m, w));
}

bool face_supported(const AngularModel& m, Subset S) {
  const int k = subset_size(S);
  if (k == 1 || k == m.dim()) return true;
  return m.family() == Family::AsymLogistic || m.family() == Family::ExtremalT;
}

double log_face_density_logw(const AngularModel& m, Subset S, std::span<const double> logw_face) {
  const int d = m.dim();
  const int k = subset_size(S);
  if (S == 0 || S > full_set(d)) throw ValidationError("face must be a nonempty subset of the coordinates");
  if (static_cast<int>(logw_face.size()) != k) throw ValidationError("face point has the wrong dimension");
  if (k == d) return log_angular_density_logw(m, logw_face);
  if (k == 1) {
    const double vm = vertex_mass(m, std::countr_zero(S));
    return vm > 0 ? std::log(vm) : kNegInf;
  }
  switch (m.family()) {
    case Family::AsymLogistic: return al_log_face(m, S, logw_face);
    case Family::ExtremalT: return et_log_face(m, S, logw_face);
    default:
      throw UnsupportedError(std::string(family_name(m.family())) + " has no density on faces of dimension 1 < |S| < d");
  }
}

double face_density(const AngularModel& m, Subset S, std::span<const double> w) {
  const int d = m.dim();
  if (static_cast<int>(w.size()) != d) throw ValidationError("point has the wrong dimension");
  if (S == 0 || S > full_set(d)) throw ValidationError("face must be a nonempty subset of the coordinates");
  if (!face_supported(m, S))
    throw UnsupportedError(std::string(family_name(m.family())) + " has no density on faces of dimension 1 < |S| < d");
  std::vector<double> lw;
  double s = 0.0;
  for (int j = 0; j < d; ++j) {
    s += w[j];
    if (subset_contains(S, j)) {
      if (!(w[j] > 0)) throw DomainError("point is not in the relative interior of the face");
      lw.push_back(std::log(w[j]));
    } else if (w[j] != 0.0) {
      throw DomainError("point does not lie on the requested face");
    }
  }
  if (std::abs(s - 1.0) > 1e-9) throw ValidationError("point does not lie on the unit simplex");
  return std::exp(log_face_density_logw(m, S, lw));
}

double vertex_mass(const AngularModel& m, int j) {
  const int d = m.dim();
  if (j < 0 || j >= d) throw ValidationError("vertex index out of range");
  switch (m.family()) {
    case Family::AsymLogistic: {
      const auto& q = m.as<AsymLogisticParams>();
      double b = q.beta(Subset{1} << j, j);
      // components with alpha_S = 1 put their weight on the vertices
      for (Subset S = 1; S <= full_set(d); ++S)
        if (subset_size(S) >= 2 && subset_contains(S, j) && q.alpha[S] <= 1.0) b += q.beta(S, j);
      return b / d;
    }
    case Family::ExtremalT: {
      const auto& q = m.as<ExtremalTParams>();
      std::vector<double> upper;
      for (int i = 0; i < d; ++i) {
        if (i == j) continue;
        const double r = q.rho(i, j);
        upper.push_back(-r * std::sqrt(q.nu + 1.0) / std::sqrt(1.0 - r * r));
      }
      return mvt_cdf(upper, m.cache().partial[j], q.nu + 1.0) / d;
    }
    default: return 0.0;
  }
}

double face_mass(const AngularModel& m, Subset S, double tol) {
  const int d = m.dim();
  const int k = subset_size(S);
  if (S == 0 || S > full_set(d)) throw ValidationError("face must be a nonempty subset of the coordinates");
  if (k == 1) return vertex_mass(m, std::countr_zero(S));
  if (!face_supported(m, S))
    throw UnsupportedError(std::string(family_name(m.family())) + " has no density on faces of dimension 1 < |S| < d");
  if (m.family() == Family::AsymLogistic) {
    const auto& q = m.as<AsymLogisticParams>();
    if (q.alpha[S] <= 1.0) return 0.0;
    double b = 0.0;
    for (int j = 0; j < d; ++j)
      if (subset_contains(S, j)) b += q.beta(S, j);
    return b / d;
  }
  // these families are absolutely continuous on the interior by construction
  if (m.family() == Family::TiltedDirichlet || m.family() == Family::PairwiseBeta ||
      m.family() == Family::HuslerReiss)
    return k < d ? 0.0 : 1.0;
  detail::LogisticOptions o;
  o.tol = tol;
  o.scale = m.cache().scale;
  auto f = [&](std::span<const double> lw) { return log_face_density_logw(m, S, lw); };
  return detail::integrate_logistic(k, f, o).value;
}

std::vector<FaceMass> mass_decomposition(const AngularModel& m, double tol) {
  std::vector<FaceMass> out;
  const int d = m.dim();
  for (Subset S = 1; S <= full_set(d); ++S) {
    if (!face_supported(m, S)) continue;
    const double mass = face_mass(m, S, tol);
    if (mass > 0.0 || subset_size(S) == d) out.push_back({S, mass});
  }
  return out;
}

Eigen::VectorXd angular_moments(const AngularModel& m, double tol) {
  const int d = m.dim();
  Eigen::VectorXd mom = Eigen::VectorXd::Zero(d);
  for (Subset S = 1; S <= full_set(d); ++S) {
    const int k = subset_size(S);
    if (!face_supported(m, S)) continue;
    if (k == 1) {
      mom(std::countr_zero(S)) += vertex_mass(m, std::countr_zero(S));
      continue;
    }
    if (face_mass(m, S, tol) == 0.0 && m.family() == Family::AsymLogistic) continue;
    std::vector<int> idx;
    for (int j = 0; j < d; ++j)
      if (subset_contains(S, j)) idx.push_back(j);
    detail::LogisticOptions o;
    o.tol = tol;
    o.scale = m.cache().scale;
    for (int t = 0; t < k; ++t) {
      auto f = [&, t](std::span<const double> lw) { return log_face_density_logw(m, S, lw) + lw[t]; };
      mom(idx[t]) += detail::integrate_logistic(k, f, o).value;
    }
  }
  return mom;
}

}  // namespace extdep
