#pragma once

#include "extdep/angular_model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace extdep {

// Empirical distribution below a high threshold, generalized Pareto above it.
class MarginalModel {
public:
  MarginalModel(double threshold_quantile, double threshold_value, double gpd_scale, double gpd_shape,
                std::vector<double> below);

  double threshold_quantile() const noexcept { return q_; }
  double threshold_value() const noexcept { return u_; }
  double gpd_scale() const noexcept { return sigma_; }
  double gpd_shape() const noexcept { return xi_; }
  // Sorted observations at or below the threshold.
  const std::vector<double>& below() const noexcept { return below_; }

  // Step function q * #{b <= x} / n_below up to the threshold, so it reaches
  // q at the largest non-exceedance; q + (1 - q) G(x - u) above.
  double cdf(double x) const;
  double quantile(double p) const;
  // Upper end of the support (infinite unless the shape is negative).
  double upper_endpoint() const;

private:
  double q_, u_, sigma_, xi_;
  std::vector<double> below_;
};

double gpd_cdf(double y, double scale, double shape);
double gpd_quantile(double p, double scale, double shape);
double gpd_log_likelihood(std::span<const double> excess, double scale, double shape);

MarginalModel fit_gpd_margin(std::span<const double> x, double threshold_quantile = 0.7);

// y_i = -1 / log F(x_i). Throws TransformError naming the first index with
// F in {0, 1}.
std::vector<double> to_unit_frechet(std::span<const double> x, const MarginalModel& m);

struct PseudoPolarSample {
  Eigen::VectorXd radii;
  PointMatrix angles;
  std::vector<std::size_t> source_rows;  // row of the input each point came from
  int dim() const { return static_cast<int>(angles.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(radii.size()); }
};

PseudoPolarSample to_pseudo_polar(const PointMatrix& y);

// The k points with the largest radii, in decreasing radius; ties keep the
// earlier input row first.
PseudoPolarSample select_extremes(const PseudoPolarSample& s, std::size_t k);

}  // namespace extdep
