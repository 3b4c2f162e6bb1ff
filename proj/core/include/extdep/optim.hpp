#pragma once

#include <Eigen/Dense>

#include <functional>

namespace extdep {

struct NelderMeadOptions {
  double ftol = 1e-8;        // absolute spread of f over the simplex
  int max_iterations = 5000;
  double initial_step = 0.5;
  int restarts = 1;          // re-initialize around the optimum after convergence
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

// Derivative-free minimization. Non-finite objective values are treated as
// +infinity, so constraints can be expressed by returning NaN or inf.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& opts = {});

}  // namespace extdep
