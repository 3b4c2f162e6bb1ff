#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace extdep {

// Symmetric, unit-diagonal, positive semidefinite matrix. Slightly negative
// eigenvalues (down to -1e-10) are clipped on construction; anything worse is
// rejected with a NumericError.
class CorrelationMatrix {
public:
  CorrelationMatrix() = default;
  explicit CorrelationMatrix(const Eigen::MatrixXd& m);

  static CorrelationMatrix identity(int dim);
  // Builds a matrix from the strict upper triangle listed row by row
  // (r12, r13, ..., r1d, r23, ...).
  static CorrelationMatrix from_upper(int dim, std::span<const double> upper);

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  double min_eigenvalue() const;

  CorrelationMatrix submatrix(std::span<const int> index) const;

private:
  Eigen::MatrixXd m_;
};

struct CdfOptions {
  double tol = 1e-7;              // absolute error target
  std::uint64_t seed = 0x6a09e667f3bcc908ULL;  // lattice shifts (QMC path only)
  std::size_t max_points = std::size_t{1} << 21;
};

double normal_cdf(double x);
double normal_quantile(double p);
double student_t_cdf(double x, double df);
double student_t_quantile(double p, double df);

// P(X <= h, Y <= k) for a standard bivariate normal with correlation rho.
double bvn_cdf(double h, double k, double rho);

// Orthant probabilities P(Z <= upper). Entries of +inf drop the coordinate,
// -inf gives zero. Dimensions 1-4 are supported.
double mvn_cdf(std::span<const double> upper, const CorrelationMatrix& corr,
               const CdfOptions& opts = {});
double mvt_cdf(std::span<const double> upper, const CorrelationMatrix& corr, double df,
               const CdfOptions& opts = {});

// P(Z > lower), via symmetry of the centred distributions.
double mvn_survival(std::span<const double> lower, const CorrelationMatrix& corr,
                    const CdfOptions& opts = {});
double mvt_survival(std::span<const double> lower, const CorrelationMatrix& corr, double df,
                    const CdfOptions& opts = {});

// Separation-of-variables randomized-lattice estimator. mvn_cdf/mvt_cdf use
// deterministic conditioning quadrature where it is cheaper; this is exposed
// for the remaining case (t in four dimensions) and for cross-checks.
struct QmcResult {
  double value;
  double std_error;
  std::size_t points;
};
QmcResult mvn_cdf_qmc(std::span<const double> upper, const CorrelationMatrix& corr,
                      const CdfOptions& opts = {});
QmcResult mvt_cdf_qmc(std::span<const double> upper, const CorrelationMatrix& corr, double df,
                      const CdfOptions& opts = {});

double mvn_log_pdf(std::span<const double> x, const CorrelationMatrix& corr);
double mvt_log_pdf(std::span<const double> x, const CorrelationMatrix& corr, double df);

// Conditional correlation structures of the Husler-Reiss and extremal-t
// models given component j (0-based). `lambda` is symmetric with ignored
// diagonal. Results are (d-1)x(d-1), rows ordered as the remaining indices.
CorrelationMatrix partial_corr_hr(const Eigen::MatrixXd& lambda, int j);
CorrelationMatrix partial_corr_et(const CorrelationMatrix& rho, int j);

}  // namespace extdep
