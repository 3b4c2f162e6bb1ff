#pragma once

#include "extdep/angular_model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace extdep::detail {

struct ModelCache {
  double log_d = 0.0;
  double scale = 1.0;  // spread of H in additive-logistic coordinates

  // tilted Dirichlet: lgamma(sum alpha + 1) - log d + sum(log alpha - lgamma alpha)
  double td_log_const = 0.0;

  // pairwise beta
  double pb_log_const = 0.0;
  std::vector<double> pb_pair_const;  // lgamma(2b) - 2 lgamma(b), pair order

  // Husler-Reiss / extremal-t conditional correlation given each component
  std::vector<CorrelationMatrix> partial;
  // interior density kernel (conditioning on component 0)
  bool density_ok = false;
  Eigen::MatrixXd chol0_inv;  // inverse of the lower Cholesky factor
  double logdet0 = 0.0;
  double et_log_const = 0.0;
};

}  // namespace extdep::detail
