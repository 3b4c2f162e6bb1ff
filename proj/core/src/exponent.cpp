#include "extdep/angular_model.hpp"
#include "extdep/error.hpp"
#include "logistic_quadrature.hpp"
#include "model_cache.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace extdep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> finite_coords(std::span<const double> y, int d) {
  if (static_cast<int>(y.size()) != d) throw ValidationError("threshold vector has the wrong dimension");
  std::vector<int> out;
  for (int j = 0; j < d; ++j) {
    if (std::isnan(y[j]) || !(y[j] > 0)) throw ValidationError("thresholds must be positive");
    if (std::isfinite(y[j])) out.push_back(j);
  }
  return out;
}

double al_exponent(const AngularModel& m, std::span<const double> y) {
  const auto& q = m.as<AsymLogisticParams>();
  const int d = m.dim();
  double v = 0.0;
  std::vector<double> terms;
  for (Subset S = 1; S <= full_set(d); ++S) {
    const double a = q.alpha[S];
    terms.clear();
    for (int j = 0; j < d; ++j) {
      if (!subset_contains(S, j) || !std::isfinite(y[j])) continue;
      const double b = q.beta(S, j);
      if (b <= 0.0) continue;
      terms.push_back(a * (std::log(b) - std::log(y[j])));
    }
    if (terms.empty()) continue;
    const double a_eff = subset_size(S) == 1 ? 1.0 : a;
    v += std::exp(detail::log_sum_exp(terms) / a_eff);
  }
  return v;
}

// sum_j (1/y_j) F_{k-1}(x^(j)) over the finite coordinates, F the normal or t CDF.
double hr_et_exponent(const AngularModel& m, std::span<const double> y, const std::vector<int>& fin, bool survival) {
  const int k = static_cast<int>(fin.size());
  if (k == 1) return survival ? 1.0 / y[fin[0]] : 1.0 / y[fin[0]];
  const bool hr = m.family() == Family::HuslerReiss;
  double v = 0.0;
  for (int j : fin) {
    std::vector<double> x;
    std::vector<int> sub;  // positions inside partial[j] (which skips j)
    for (int i : fin) {
      if (i == j) continue;
      sub.push_back(i < j ? i : i - 1);
      if (hr) {
        const double l = m.as<HuslerReissParams>().lambda(i, j);
        x.push_back(l + std::log(y[i] / y[j]) / (2.0 * l));
      } else {
        const auto& q = m.as<ExtremalTParams>();
        const double r = q.rho(i, j);
        x.push_back(std::sqrt((q.nu + 1.0) / (1.0 - r * r)) * (std::pow(y[i] / y[j], 1.0 / q.nu) - r));
      }
    }
    const CorrelationMatrix C = m.cache().partial[j].submatrix(sub);
    if (survival)
      for (double& xi : x) xi = -xi;
    const double p = hr ? mvn_cdf(x, C) : mvt_cdf(x, C, m.as<ExtremalTParams>().nu + 1.0);
    v += p / y[j];
  }
  return v;
}

double quadrature_functional(const AngularModel& m, std::span<const double> y, const std::vector<int>& fin, bool use_max,
                             double tol) {
  const int d = m.dim();
  std::vector<double> shift(d, 0.0), ly(d, kInf);
  for (int j : fin) {
    ly[j] = std::log(y[j]);
    shift[j] = -ly[j];
  }
  const double log_d = m.cache().log_d;
  auto f = [&](std::span<const double> lw) {
    double g = use_max ? -kInf : kInf;
    for (int j = 0; j < d; ++j) {
      const double t = lw[j] - ly[j];
      g = use_max ? std::max(g, t) : std::min(g, t);
    }
    if (g == -kInf) return -kInf;
    return log_d + g + log_angular_density_logw(m, lw);
  };
  detail::LogisticOptions o;
  o.tol = tol * 0.1;
  o.scale = m.cache().scale;
  o.shift = shift;
  const QuadratureResult r = detail::integrate_logistic(d, f, o);
  if (!(r.error <= std::max(tol * std::abs(r.value), 1e-14) * 10.0))
    throw NumericError("quadrature did not reach tolerance", r.value, r.error);
  return r.value;
}

}  // namespace

double exponent_function(const AngularModel& m, std::span<const double> y, double tol) {
  const auto fin = finite_coords(y, m.dim());
  if (fin.empty()) return 0.0;
  if (fin.size() == 1) return 1.0 / y[fin[0]];
  switch (m.family()) {
    case Family::AsymLogistic: return al_exponent(m, y);
    case Family::HuslerReiss:
    case Family::ExtremalT: return hr_et_exponent(m, y, fin, false);
    default: break;
  }
  // vertex masses of TD/PB are zero, so the interior carries everything
  return quadrature_functional(m, y, fin, true, tol);
}

double tail_dependence_fn(const AngularModel& m, std::span<const double> y, double tol) {
  const auto fin = finite_coords(y, m.dim());
  if (static_cast<int>(fin.size()) < m.dim()) return 0.0;
  return quadrature_functional(m, y, fin, false, tol);
}

double tail_dependence_closed_form(const AngularModel& m, std::span<const double> y) {
  const auto fin = finite_coords(y, m.dim());
  if (fin.empty()) return 0.0;
  switch (m.family()) {
    case Family::HuslerReiss:
    case Family::ExtremalT: return std::max(0.0, hr_et_exponent(m, y, fin, true));
    case Family::AsymLogistic: {
      // inclusion-exclusion over the exponent functions of sub-vectors
      const int k = static_cast<int>(fin.size());
      double r = 0.0;
      std::vector<double> yy(m.dim());
      for (Subset U = 1; U < (Subset{1} << k); ++U) {
        std::fill(yy.begin(), yy.end(), kInf);
        for (int t = 0; t < k; ++t)
          if (subset_contains(U, t)) yy[fin[t]] = y[fin[t]];
        r += (subset_size(U) % 2 ? 1.0 : -1.0) * al_exponent(m, yy);
      }
      return std::max(0.0, r);
    }
    default:
      throw UnsupportedError(std::string(family_name(m.family())) + " has no closed-form tail dependence function");
  }
}

double pickands(const AngularModel& m, std::span<const double> t, double tol) {
  const int d = m.dim();
  if (static_cast<int>(t.size()) != d) throw ValidationError("point has the wrong dimension");
  double s = 0.0, tmax = 0.0;
  std::vector<double> y(d);
  for (int j = 0; j < d; ++j) {
    if (!(t[j] >= 0.0)) throw DomainError("Pickands argument must have nonnegative coordinates");
    s += t[j];
    tmax = std::max(tmax, t[j]);
    y[j] = t[j] > 0 ? 1.0 / t[j] : kInf;
  }
  if (std::abs(s - 1.0) > 1e-9) throw DomainError("Pickands argument must lie on the unit simplex");
  const double a = exponent_function(m, y, tol);
  const double slack = has_closed_form_exponent(m.family()) ? 1e-9 : 10.0 * tol;
  if (a < tmax - slack || a > 1.0 + slack)
    throw DomainError("Pickands function outside [max t_j, 1]; model evaluation failed");
  return std::clamp(a, tmax, 1.0);
}

}  // namespace extdep
