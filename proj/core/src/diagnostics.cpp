#include "extdep/diagnostics.hpp"

#include "extdep/error.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace extdep {

double spectral_density_zero(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) throw ValidationError("spectral density needs at least 4 draws");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  const auto max_order =
      std::min<std::size_t>(n - 1, static_cast<std::size_t>(std::floor(10.0 * std::log10(static_cast<double>(n)))));
  std::vector<double> acov(max_order + 1, 0.0);
  for (std::size_t lag = 0; lag <= max_order; ++lag) {
    double s = 0.0;
    for (std::size_t t = lag; t < n; ++t) s += (x[t] - mean) * (x[t - lag] - mean);
    acov[lag] = s / static_cast<double>(n);
  }
  if (!(acov[0] > 0.0)) throw ValidationError("chain has zero variance");

  // An exactly linear series has no stochastic part; report zero rather than
  // letting the AR fit read the trend as persistence.
  {
    const double tbar = 0.5 * static_cast<double>(n - 1);
    double stt = 0.0, sxt = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double dt = static_cast<double>(t) - tbar;
      stt += dt * dt;
      sxt += dt * (x[t] - mean);
    }
    const double slope = sxt / stt;
    double rss = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double r = x[t] - mean - slope * (static_cast<double>(t) - tbar);
      rss += r * r;
    }
    if (std::sqrt(rss / static_cast<double>(n)) <= 1e-8 * std::sqrt(acov[0])) return 0.0;
  }

  // Levinson-Durbin recursion, keeping the AIC-best order
  std::vector<double> phi, prev;
  double sigma2 = acov[0];
  const double nd = static_cast<double>(n);
  double best_aic = nd * std::log(sigma2);
  double best_spec = sigma2;
  for (std::size_t p = 1; p <= max_order; ++p) {
    double num = acov[p];
    for (std::size_t j = 0; j + 1 < p; ++j) num -= phi[j] * acov[p - 1 - j];
    const double k = num / sigma2;
    prev = phi;
    phi.assign(p, 0.0);
    for (std::size_t j = 0; j + 1 < p; ++j) phi[j] = prev[j] - k * prev[p - 2 - j];
    phi[p - 1] = k;
    sigma2 *= (1.0 - k * k);
    if (!(sigma2 > 0.0)) break;
    const double aic = nd * std::log(sigma2) + 2.0 * static_cast<double>(p);
    if (aic < best_aic) {
      best_aic = aic;
      double s = 1.0;
      for (double c : phi) s -= c;
      best_spec = sigma2 / (s * s);
    }
  }
  return best_spec;
}

double geweke(std::span<const double> chain, double frac_a, double frac_b) {
  const std::size_t n = chain.size();
  if (n < 100) throw ValidationError("Geweke diagnostic needs at least 100 draws");
  if (!(frac_a > 0.0 && frac_b > 0.0 && frac_a + frac_b <= 1.0))
    throw ValidationError("Geweke segment fractions must be positive and sum to at most 1");
  const auto na = static_cast<std::size_t>(std::floor(frac_a * static_cast<double>(n)));
  const auto nb = static_cast<std::size_t>(std::floor(frac_b * static_cast<double>(n)));
  const auto a = chain.first(na);
  const auto b = chain.last(nb);
  auto mean = [](std::span<const double> s) {
    double m = 0.0;
    for (double v : s) m += v;
    return m / static_cast<double>(s.size());
  };
  const double va = spectral_density_zero(a) / static_cast<double>(na);
  const double vb = spectral_density_zero(b) / static_cast<double>(nb);
  if (!(va + vb > 0.0)) throw ValidationError("Geweke diagnostic: both segments have zero spectral variance");
  return (mean(a) - mean(b)) / std::sqrt(va + vb);
}

double cramer_von_mises_cdf(double q) {
  if (q <= 0.0) return 0.0;
  // Positive series; term k carries exp(-u_k) with u_k = (4k+1)^2 / (16 q), so
  // about sqrt(q) terms matter. Truncating at four terms, as is common, makes
  // the result decay back toward 0 for q > 3.
  double total = 0.0;
  for (int k = 0;; ++k) {
    const double u = std::pow(4.0 * k + 1.0, 2) / (16.0 * q);
    if (u > 40.0) break;
    const double log_z = std::lgamma(k + 0.5) - std::lgamma(k + 1.0) + 0.5 * std::log(4.0 * k + 1.0) -
                         1.5 * std::log(std::numbers::pi) - 0.5 * std::log(q);
    total += std::exp(log_z - u) * boost::math::cyl_bessel_k(0.25, u);
  }
  return std::min(total, 1.0);
}

HeidelbergerWelchResult heidelberger_welch(std::span<const double> chain, double alpha) {
  const std::size_t n = chain.size();
  if (n < 200) throw ValidationError("Heidelberger-Welch test needs at least 200 draws");
  const double s0 = spectral_density_zero(chain.subspan(n / 2));
  HeidelbergerWelchResult res;
  if (!(s0 > 0.0)) {
    // deterministic trend: the bridge statistic is unbounded at every start
    res.statistic = std::numeric_limits<double>::infinity();
    return res;
  }
  for (int step = 0; step <= 5; ++step) {
    const std::size_t start = static_cast<std::size_t>(step) * n / 10;
    const auto y = chain.subspan(start);
    const double m = static_cast<double>(y.size());
    double ybar = 0.0;
    for (double v : y) ybar += v;
    ybar /= m;
    double cum = 0.0, stat = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
      cum += y[t];
      const double B = cum - ybar * static_cast<double>(t + 1);
      stat += B * B / (m * s0);
    }
    stat /= m;
    const double cdf = cramer_von_mises_cdf(stat);
    res.statistic = stat;
    res.p_value = 1.0 - cdf;
    res.start_index = start;
    if (cdf < 1.0 - alpha) {
      res.passed = true;
      return res;
    }
  }
  res.passed = false;
  return res;
}

}  // namespace extdep
