#pragma once

// Nested 1-D quadrature over the open (k-1)-simplex in additive-logistic
// coordinates: w = softmax(z_1, ..., z_{k-1}, 0). The Jacobian of that map is
// w_1 * ... * w_k, which turns boundary-concentrated densities into
// exponentially decaying ones on R^{k-1}. Integrands are supplied on the log
// scale.

#include "extdep/simplex_quadrature.hpp"

#include <functional>
#include <span>
#include <vector>

namespace extdep::detail {

// Receives log w (k entries); returns the log of the integrand with respect to
// Lebesgue measure on the first k-1 coordinates. -inf is allowed.
using LogIntegrand = std::function<double(std::span<const double> logw)>;
// Optional signed multiplier of the integrand as a function of z (k-1 entries).
using ZWeight = std::function<double(std::span<const double> z)>;

struct LogisticOptions {
  double tol = 1e-8;  // relative, per 1-D piece
  double scale = 1.0; // spread of the integrand in z units
  // Kinks of the integrand lie on hyperplanes z_i + shift_i = z_j + shift_j
  // (z_k = 0); breakpoints are placed there. Empty means smooth.
  std::vector<double> shift;
  ZWeight weight;
};

QuadratureResult integrate_logistic(int k, const LogIntegrand& f, const LogisticOptions& opts);

// log w from z, z_k = 0 implied.
void logistic_logw(std::span<const double> z, std::span<double> logw);

double log_sum_exp(std::span<const double> v);

}  // namespace extdep::detail
