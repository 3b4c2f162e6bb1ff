#pragma once

#include "extdep/angular_model.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace extdep {

// Elementwise map from an unconstrained working value u to a parameter.
struct Transform {
  enum class Kind { Log, Tanh, Logistic, ShiftedLog };
  Kind kind = Kind::Log;
  double lo = 0.0, hi = 1.0;  // Logistic: (lo, hi); ShiftedLog: lo + e^u

  double to_param(double u) const;
  double to_working(double theta) const;
  double dparam_du(double u) const;
};

// Working-scale parameterization of a family. The fitted parameter vector is
// model.parameters() for every family except the asymmetric logistic, which
// is fitted in its exchangeable form (alpha, beta_1, ..., beta_d).
class ParameterCodec {
public:
  enum class Purpose { Likelihood, Posterior };
  ParameterCodec(Family f, int d, Purpose purpose = Purpose::Likelihood);

  Family family() const noexcept { return family_; }
  int dim() const noexcept { return d_; }
  int size() const noexcept { return static_cast<int>(transforms_.size()); }
  const std::vector<Transform>& transforms() const noexcept { return transforms_; }
  std::vector<std::string> names() const;

  Eigen::VectorXd to_params(const Eigen::VectorXd& u) const;
  Eigen::VectorXd to_working(const Eigen::VectorXd& theta) const;
  // Diagonal of d theta / d u.
  Eigen::VectorXd jacobian_diag(const Eigen::VectorXd& u) const;

  // Throws ValidationError when theta is outside the family's constraints.
  AngularModel model(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd params_of(const AngularModel& m) const;

private:
  Family family_;
  int d_;
  std::vector<Transform> transforms_;
};

// Starting value for the optimizer from pairwise extremal coefficients and
// angle dispersion of the sample.
Eigen::VectorXd moment_start(Family f, const PointMatrix& W);

}  // namespace extdep
