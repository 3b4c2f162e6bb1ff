#include "extdep/margins.hpp"

#include "extdep/error.hpp"
#include "extdep/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace extdep {

namespace {

constexpr double kShapeLo = -0.5, kShapeHi = 1.0;
constexpr double kTinyShape = 1e-8;

double type7_quantile(std::vector<double> sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double shape_from(double v) { return kShapeLo + (kShapeHi - kShapeLo) / (1.0 + std::exp(-v)); }
double shape_to(double xi) {
  const double t = (xi - kShapeLo) / (kShapeHi - kShapeLo);
  return std::log(t / (1.0 - t));
}

}  // namespace

double gpd_cdf(double y, double scale, double shape) {
  if (y <= 0.0) return 0.0;
  const double z = y / scale;
  if (std::abs(shape) < kTinyShape) return -std::expm1(-z);
  const double t = 1.0 + shape * z;
  if (t <= 0.0) return 1.0;
  return -std::expm1(-std::log(t) / shape);
}

double gpd_quantile(double p, double scale, double shape) {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("GPD quantile needs p in [0, 1)");
  const double l = -std::log1p(-p);
  if (std::abs(shape) < kTinyShape) return scale * l;
  return scale * std::expm1(shape * l) / shape;
}

double gpd_log_likelihood(std::span<const double> excess, double scale, double shape) {
  if (!(scale > 0.0)) return -std::numeric_limits<double>::infinity();
  double ll = -static_cast<double>(excess.size()) * std::log(scale);
  for (double y : excess) {
    const double z = y / scale;
    if (std::abs(shape) < kTinyShape) {
      ll -= z;
      continue;
    }
    const double t = 1.0 + shape * z;
    if (t <= 0.0) return -std::numeric_limits<double>::infinity();
    ll -= (1.0 + 1.0 / shape) * std::log(t);
  }
  return ll;
}

MarginalModel::MarginalModel(double threshold_quantile, double threshold_value, double gpd_scale,
                             double gpd_shape, std::vector<double> below)
    : q_(threshold_quantile), u_(threshold_value), sigma_(gpd_scale), xi_(gpd_shape), below_(std::move(below)) {
  if (!(q_ > 0.0 && q_ < 1.0)) throw ValidationError("threshold quantile must lie in (0, 1)");
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) throw ValidationError("GPD scale must be positive");
  if (!std::isfinite(xi_) || !std::isfinite(u_)) throw ValidationError("GPD parameters must be finite");
  if (below_.empty()) throw ValidationError("marginal model needs observations below the threshold");
  std::sort(below_.begin(), below_.end());
  if (below_.back() > u_) throw ValidationError("below-threshold observations exceed the threshold");
}

double MarginalModel::cdf(double x) const {
  if (x > u_) return q_ + (1.0 - q_) * gpd_cdf(x - u_, sigma_, xi_);
  const auto cnt = std::upper_bound(below_.begin(), below_.end(), x) - below_.begin();
  if (x == u_) return q_;
  return q_ * static_cast<double>(cnt) / static_cast<double>(below_.size());
}

double MarginalModel::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  if (p > q_) return u_ + gpd_quantile((p - q_) / (1.0 - q_), sigma_, xi_);
  const double n = static_cast<double>(below_.size());
  auto r = static_cast<std::size_t>(std::ceil(p * n / q_ - 1e-12));
  r = std::clamp<std::size_t>(r, 1, below_.size());
  return below_[r - 1];
}

double MarginalModel::upper_endpoint() const {
  return xi_ < 0.0 ? u_ - sigma_ / xi_ : std::numeric_limits<double>::infinity();
}

MarginalModel fit_gpd_margin(std::span<const double> x, double threshold_quantile) {
  if (!(threshold_quantile > 0.0 && threshold_quantile < 1.0))
    throw ValidationError("threshold quantile must lie in (0, 1)");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i])) throw ValidationError("non-finite observation at index " + std::to_string(i));
  if (x.size() < 50) throw EstimationError("marginal fit needs at least 50 observations");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double u = type7_quantile(sorted, threshold_quantile);

  std::vector<double> excess, below;
  for (double v : sorted) (v > u ? excess : below).push_back(v > u ? v - u : v);
  if (excess.size() < 20) throw EstimationError("marginal fit needs at least 20 threshold exceedances");

  // moment estimates as the starting point
  const double n = static_cast<double>(excess.size());
  const double mean = std::accumulate(excess.begin(), excess.end(), 0.0) / n;
  double var = 0.0;
  for (double e : excess) var += (e - mean) * (e - mean);
  var /= (n - 1.0);
  const double xi0 = std::clamp(0.5 * (1.0 - mean * mean / var), -0.4, 0.9);
  const double s0 = std::max(mean * (1.0 - xi0), 1e-8 * (1.0 + std::abs(mean)));

  auto nll = [&](const Eigen::VectorXd& v) {
    return -gpd_log_likelihood(excess, std::exp(v(0)), shape_from(v(1)));
  };
  NelderMeadOptions opts;
  opts.ftol = 1e-10;
  opts.initial_step = 0.3;
  Eigen::VectorXd start(2);
  start << std::log(s0), shape_to(xi0);
  auto best = nelder_mead(nll, start, opts);
  // a second start from the exponential fit guards against a poor moment start
  start << std::log(mean), shape_to(0.0);
  const auto alt = nelder_mead(nll, start, opts);
  if (alt.value < best.value) best = alt;
  if (!std::isfinite(best.value)) throw EstimationError("GPD likelihood could not be maximized");
  return MarginalModel(threshold_quantile, u, std::exp(best.x(0)), shape_from(best.x(1)), std::move(below));
}

std::vector<double> to_unit_frechet(std::span<const double> x, const MarginalModel& m) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = m.cdf(x[i]);
    if (!(F > 0.0 && F < 1.0))
      throw TransformError("marginal CDF is " + std::to_string(F) + " at index " + std::to_string(i), i);
    y[i] = -1.0 / std::log(F);
  }
  return y;
}

PseudoPolarSample to_pseudo_polar(const PointMatrix& y) {
  if (y.cols() < 2) throw ValidationError("pseudo-polar coordinates need at least two columns");
  PseudoPolarSample s;
  s.radii.resize(y.rows());
  s.angles.resize(y.rows(), y.cols());
  s.source_rows.resize(static_cast<std::size_t>(y.rows()));
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    double r = 0.0;
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      const double v = y(i, j);
      if (!(v > 0.0) || !std::isfinite(v))
        throw ValidationError("entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is not positive");
      r += v;
    }
    s.radii(i) = r;
    s.angles.row(i) = y.row(i) / r;
    s.source_rows[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
  }
  return s;
}

PseudoPolarSample select_extremes(const PseudoPolarSample& s, std::size_t k) {
  if (k < 1 || k > s.size())
    throw ValidationError("cannot keep " + std::to_string(k) + " of " + std::to_string(s.size()) + " points");
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return s.radii(static_cast<Eigen::Index>(a)) > s.radii(static_cast<Eigen::Index>(b));
  });
  PseudoPolarSample out;
  out.radii.resize(static_cast<Eigen::Index>(k));
  out.angles.resize(static_cast<Eigen::Index>(k), s.angles.cols());
  out.source_rows.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto src = static_cast<Eigen::Index>(order[i]);
    out.radii(static_cast<Eigen::Index>(i)) = s.radii(src);
    out.angles.row(static_cast<Eigen::Index>(i)) = s.angles.row(src);
    out.source_rows[i] = s.source_rows[order[i]];
  }
  return out;
}

}  // namespace extdep
