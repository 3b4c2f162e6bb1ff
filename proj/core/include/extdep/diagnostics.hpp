#pragma once

#include <cstddef>
#include <span>

namespace extdep {

// Spectral density at frequency zero from an autoregressive fit (Yule-Walker,
// order chosen by AIC up to 10 log10 n). Equals the variance for white noise.
double spectral_density_zero(std::span<const double> x);

// Difference of means between the first frac_a and last frac_b of the chain,
// standardized with spectral variance estimates. Needs at least 100 draws.
double geweke(std::span<const double> chain, double frac_a = 0.1, double frac_b = 0.5);

struct HeidelbergerWelchResult {
  bool passed = false;
  std::size_t start_index = 0;  // first start that passed (meaningless if !passed)
  double statistic = 0.0;       // Cramer-von Mises statistic at that start
  double p_value = 0.0;
};

// Stationarity test discarding 10%, 20%, ..., 50% of the chain in turn.
// Needs at least 200 draws.
HeidelbergerWelchResult heidelberger_welch(std::span<const double> chain, double alpha = 0.05);

// Distribution function of the Cramer-von Mises statistic for a Brownian bridge.
double cramer_von_mises_cdf(double q);

}  // namespace extdep
