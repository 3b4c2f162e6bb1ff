#include "extdep/summaries.hpp"

#include "extdep/error.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace extdep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Infinite entries mark coordinates that are not part of the event.
void check_thresholds(const AngularModel& m, std::span<const double> y, bool allow_inf) {
  if (static_cast<int>(y.size()) != m.dim()) throw ValidationError("threshold vector has the wrong dimension");
  for (double v : y) {
    if (std::isnan(v) || v <= 0.0) throw ValidationError("thresholds must be positive");
    if (std::isinf(v) && !allow_inf) throw ValidationError("thresholds must be finite");
  }
}

void regime_warning(std::span<const double> y, ProbabilityEstimate& e) {
  double r = 0.0;
  for (double v : y)
    if (std::isfinite(v)) r += v;
  if (r < 2.0 * static_cast<double>(y.size()))
    e.warnings.push_back("thresholds are low for the tail approximation (radius below 2d)");
}

ProbabilityEstimate finish(double raw, ProbabilityEstimate e) {
  e.raw = raw;
  e.value = std::clamp(raw, 0.0, 1.0);
  e.clipped = e.value != raw;
  if (raw > 0.5) e.warnings.push_back("approximation outside its regime (probability above 0.5), clipped to [0, 1]");
  return e;
}

double failure_mass(const AngularModel& m, std::span<const double> y, double tol) {
  if (m.family() == Family::TiltedDirichlet || m.family() == Family::PairwiseBeta)
    return failure_mass_quadrature(m, y, tol);
  return tail_dependence_closed_form(m, y);
}

}  // namespace

double extremal_coefficient(const AngularModel& m, double tol) {
  const std::vector<double> ones(static_cast<std::size_t>(m.dim()), 1.0);
  return exponent_function(m, ones, tol);
}

double chi_coefficient(const AngularModel& m, double tol) {
  const std::vector<double> ones(static_cast<std::size_t>(m.dim()), 1.0);
  if (m.family() == Family::TiltedDirichlet || m.family() == Family::PairwiseBeta)
    return tail_dependence_fn(m, ones, tol);
  return tail_dependence_closed_form(m, ones);
}

ProbabilityEstimate prob_union_exceed(const AngularModel& m, std::span<const double> y, double tol) {
  check_thresholds(m, y, true);
  if (std::none_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); }))
    throw ValidationError("union event involves no coordinate");
  ProbabilityEstimate e;
  regime_warning(y, e);
  return finish(exponent_function(m, y, tol), std::move(e));
}

ProbabilityEstimate prob_failure_region(const AngularModel& m, std::span<const double> y, double tol) {
  check_thresholds(m, y, true);
  ProbabilityEstimate e;
  regime_warning(y, e);
  return finish(failure_mass(m, y, tol), std::move(e));
}

double failure_mass_quadrature(const AngularModel& m, std::span<const double> y, double tol) {
  check_thresholds(m, y, true);
  const int d = m.dim();
  Subset involved = 0;
  for (int j = 0; j < d; ++j)
    if (std::isfinite(y[j])) involved |= Subset{1} << j;
  if (involved == 0) throw ValidationError("failure region involves no coordinate");
  if (involved == full_set(d)) return tail_dependence_fn(m, y, tol);
  // inclusion-exclusion over the involved coordinates
  double total = 0.0;
  std::vector<double> yt(static_cast<std::size_t>(d));
  for (Subset T = involved; T != 0; T = (T - 1) & involved) {
    for (int j = 0; j < d; ++j) yt[j] = subset_contains(T, j) ? y[j] : kInf;
    const double sign = subset_size(T) % 2 == 1 ? 1.0 : -1.0;
    total += sign * exponent_function(m, yt, tol);
  }
  return std::max(total, 0.0);
}

double joint_return_level(const AngularModel& m, double p, int j, std::span<const double> fixed, double tol) {
  const int d = m.dim();
  if (j < 0 || j >= d) throw ValidationError("free coordinate out of range");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("probability must lie in (0, 1)");
  std::vector<double> y(fixed.begin(), fixed.end());
  if (static_cast<int>(y.size()) != d) throw ValidationError("threshold vector has the wrong dimension");
  y[j] = kInf;
  bool others = false;
  for (int i = 0; i < d; ++i)
    if (i != j && std::isfinite(y[i])) others = true;
  // sup over y_j of the failure probability is the mass with j dropped
  const double p_max = others ? failure_mass(m, y, tol) : kInf;
  if (!(p < p_max)) {
    std::ostringstream os;
    os << "no return level: attainable probabilities are (0, " << p_max << "), requested " << p;
    throw DomainError(os.str());
  }
  auto g = [&](double log_t) {
    y[j] = std::exp(log_t);
    return std::log(failure_mass(m, y, tol)) - std::log(p);
  };
  // the failure mass is below 1/y_j, so the root lies below log(1/p)
  double hi = std::log(1.0 / p);
  double lo = hi - 2.0;
  double glo = g(lo);
  for (int it = 0; glo < 0.0 && it < 80; ++it) {
    hi = lo;
    lo -= 2.0;
    glo = g(lo);
  }
  double ghi = g(hi);
  for (int it = 0; ghi > 0.0 && it < 80; ++it) ghi = g(hi += 2.0);
  if (!(glo >= 0.0 && ghi <= 0.0)) throw DomainError("could not bracket the return level");
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(
      g, lo, hi, glo, ghi, [](double a, double b) { return std::abs(a - b) <= 1e-9; }, iters);
  return std::exp(0.5 * (r.first + r.second));
}

std::vector<std::pair<double, double>> joint_return_contour(const AngularModel& m, double p, int i, int j,
                                                            std::span<const double> fixed, int points,
                                                            double tol) {
  if (i == j) throw ValidationError("contour needs two distinct free coordinates");
  if (points < 2) throw ValidationError("contour needs at least two points");
  std::vector<double> y(fixed.begin(), fixed.end());
  if (static_cast<int>(y.size()) != m.dim()) throw ValidationError("threshold vector has the wrong dimension");
  // y_i ranges up to the level reached when coordinate j is dropped
  y[j] = kInf;
  const double yi_max = joint_return_level(m, p, i, y, tol);
  std::vector<std::pair<double, double>> out;
  const double lo = std::log(yi_max) - std::log(1e3), hi = std::log(yi_max) + std::log1p(-1e-4);
  for (int k = 0; k < points; ++k) {
    y[i] = std::exp(lo + (hi - lo) * k / (points - 1));
    out.emplace_back(y[i], joint_return_level(m, p, j, y, tol));
  }
  return out;
}

}  // namespace extdep
