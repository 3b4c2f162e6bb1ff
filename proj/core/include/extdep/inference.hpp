#pragma once

#include "extdep/angular_model.hpp"
#include "extdep/parameterization.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace extdep {

// Coordinates below this are raised to it (and the row renormalized) before
// any likelihood evaluation.
inline constexpr double kBoundaryNudge = 1e-10;

PointMatrix nudge_interior(const PointMatrix& W);
// Order-sensitive hash of the angles, used to check that fits share data.
std::uint64_t data_fingerprint(const PointMatrix& W);

// Sum of log interior densities; -inf when any density vanishes. Throws
// ValidationError if a row is not strictly inside the simplex.
double log_likelihood(const AngularModel& m, const PointMatrix& W);
// Per-observation log densities.
Eigen::VectorXd log_density_terms(const AngularModel& m, const PointMatrix& W);

struct FitOptions {
  int starts = 10;          // first start is moment-informed, the rest perturbed
  double start_spread = 0.5;
  std::uint64_t seed = 1;
  double ftol = 1e-8;
  int max_iterations = 5000;
  double fd_step = 1e-5;
  bool allow_small_sample = false;  // otherwise m < 5p only warns
};

struct StartReport {
  int index = 0;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string message;
};

struct FitResult {
  explicit FitResult(AngularModel m) : model(std::move(m)) {}

  AngularModel model;
  std::vector<std::string> names;
  Eigen::VectorXd theta_hat;    // constrained scale
  Eigen::VectorXd working_hat;  // optimizer scale
  double loglik = 0.0;
  Eigen::MatrixXd J, K;         // working scale, per observation
  Eigen::MatrixXd sandwich_cov; // constrained scale
  Eigen::VectorXd std_errors;
  double tic = 0.0;
  double bic = 0.0;
  std::size_t m = 0;
  bool converged = false;
  bool covariance_ok = false;
  int best_start = 0;
  int iterations = 0;
  int evaluations = 0;
  std::vector<StartReport> starts;
  std::vector<std::string> warnings;
  std::uint64_t fingerprint = 0;

  Family family() const { return model.family(); }
  int parameter_count() const { return static_cast<int>(theta_hat.size()); }
};

FitResult fit_mle(Family family, const PointMatrix& W, const FitOptions& opts = {});

// Standard errors and criteria at a given parameter value (used by fit_mle;
// also handy for evaluating published estimates).
FitResult evaluate_fit(const ParameterCodec& codec, const Eigen::VectorXd& theta, const PointMatrix& W,
                       double fd_step = 1e-5);

// -2 (loglik - tr(K J^-1)); throws CovarianceError when J is singular.
double tic(const FitResult& fit);
double bic(double loglik, int p, std::size_t m);

enum class Criterion { TIC, BIC };
struct RankEntry {
  std::size_t index;  // position in the input list
  Family family;
  double value;
  int parameters;
};
std::vector<RankEntry> select_model(const std::vector<FitResult>& fits, Criterion c);

}  // namespace extdep
