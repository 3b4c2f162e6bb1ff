#pragma once

#include "extdep/angular_model.hpp"
#include "extdep/parameterization.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace extdep {

enum class PriorTransform { Log, SignedLogitSquare, Identity };

struct PriorComponent {
  std::string name;
  PriorTransform transform = PriorTransform::Log;
  double sd = 3.0;  // normal(0, sd) on the transformed scale
};

struct PriorSpec {
  Family family = Family::HuslerReiss;
  int d = 0;
  std::vector<PriorComponent> components;

  // Log density of the parameter vector on its constrained scale.
  double log_density(const Eigen::VectorXd& theta) const;
};

PriorSpec default_prior(Family f, int d);

struct McmcOptions {
  std::size_t n_iter = 80000;  // including burn-in
  std::size_t burn_in = 30000;
  std::uint64_t seed = 1;
  double initial_sd = 0.1;
  double target_acceptance = 0.234;
  bool allow_empty = false;  // sample the prior when there are no observations
};

struct ParameterSummary {
  std::string name;
  double mean = 0.0, sd = 0.0, lower = 0.0, upper = 0.0;  // equal-tailed 95% interval
  double geweke_z = 0.0;
  bool hw_passed = false;
  std::size_t hw_start = 0;
};

struct PosteriorChain {
  Family family = Family::HuslerReiss;
  int d = 0;
  std::vector<std::string> names;
  Eigen::MatrixXd draws;  // retained iterations x parameters, constrained scale
  double acceptance_rate = 0.0;          // after burn-in
  double burn_in_acceptance_rate = 0.0;
  std::size_t burn_in = 0;
  std::size_t n_iter = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd proposal_sd;  // frozen working-scale step sizes
  std::vector<ParameterSummary> summaries;
  std::vector<std::string> warnings;

  Eigen::VectorXd posterior_mean() const;
};

// Random-walk Metropolis on R^p with independent Gaussian steps. Step sizes
// adapt (Robbins-Monro on a common scale, plus per-coordinate shape from the
// first half of burn-in) only during burn-in. Returns retained draws on the
// working scale.
struct RandomWalkResult {
  Eigen::MatrixXd draws;
  double acceptance_rate = 0.0;
  double burn_in_acceptance_rate = 0.0;
  Eigen::VectorXd proposal_sd;
};
RandomWalkResult random_walk_metropolis(const std::function<double(const Eigen::VectorXd&)>& log_target,
                                        const Eigen::VectorXd& start, const McmcOptions& opts);

PosteriorChain mh_sample(Family family, const PointMatrix& W, const PriorSpec& prior, const McmcOptions& opts = {});

// Summaries and diagnostics from constrained-scale draws.
std::vector<ParameterSummary> summarize_draws(const Eigen::MatrixXd& draws, const std::vector<std::string>& names);

}  // namespace extdep
