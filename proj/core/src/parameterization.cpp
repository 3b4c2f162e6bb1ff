#include "extdep/parameterization.hpp"

#include "extdep/error.hpp"
#include "extdep/mvgauss.hpp"

#include <algorithm>
#include <cmath>

namespace extdep {

namespace {

// ET degrees of freedom are kept in this range while maximizing the likelihood.
constexpr double kNuLo = 0.5, kNuHi = 50.0;

}  // namespace

double Transform::to_param(double u) const {
  switch (kind) {
    case Kind::Log: return std::exp(u);
    case Kind::Tanh: return std::tanh(u);
    case Kind::Logistic: return lo + (hi - lo) / (1.0 + std::exp(-u));
    case Kind::ShiftedLog: return lo + std::exp(u);
  }
  return u;
}

double Transform::to_working(double t) const {
  switch (kind) {
    case Kind::Log: return std::log(t);
    case Kind::Tanh: return std::atanh(t);
    case Kind::Logistic: {
      const double x = (t - lo) / (hi - lo);
      return std::log(x / (1.0 - x));
    }
    case Kind::ShiftedLog: return std::log(t - lo);
  }
  return t;
}

double Transform::dparam_du(double u) const {
  switch (kind) {
    case Kind::Log: return std::exp(u);
    case Kind::Tanh: {
      const double t = std::tanh(u);
      return 1.0 - t * t;
    }
    case Kind::Logistic: {
      const double s = 1.0 / (1.0 + std::exp(-u));
      return (hi - lo) * s * (1.0 - s);
    }
    case Kind::ShiftedLog: return std::exp(u);
  }
  return 1.0;
}

ParameterCodec::ParameterCodec(Family f, int d, Purpose purpose) : family_(f), d_(d) {
  if (d < 2 || d > 4) throw ValidationError("dimension must be between 2 and 4");
  const int np = d * (d - 1) / 2;
  using K = Transform::Kind;
  switch (f) {
    case Family::TiltedDirichlet: transforms_.assign(d, {K::Log}); break;
    case Family::PairwiseBeta:
      if (d < 3) throw ValidationError("pairwise beta model requires d >= 3");
      transforms_.assign(np + 1, {K::Log});
      break;
    case Family::HuslerReiss: transforms_.assign(np, {K::Log}); break;
    case Family::ExtremalT:
      transforms_.assign(np, {K::Tanh});
      transforms_.push_back(purpose == Purpose::Likelihood ? Transform{K::Logistic, kNuLo, kNuHi} : Transform{K::Log});
      break;
    case Family::AsymLogistic:
      transforms_.push_back({K::ShiftedLog, 1.0});
      transforms_.insert(transforms_.end(), d, Transform{K::Logistic, 0.0, 1.0});
      break;
  }
}

std::vector<std::string> ParameterCodec::names() const {
  if (family_ != Family::AsymLogistic) return model(to_params(Eigen::VectorXd::Zero(size()))).parameter_names();
  std::vector<std::string> out{"alpha"};
  for (int j = 0; j < d_; ++j) out.push_back("beta_" + std::to_string(j + 1));
  return out;
}

Eigen::VectorXd ParameterCodec::to_params(const Eigen::VectorXd& u) const {
  if (u.size() != size()) throw ValidationError("working vector has the wrong length");
  Eigen::VectorXd t(u.size());
  for (int k = 0; k < size(); ++k) t(k) = transforms_[k].to_param(u(k));
  return t;
}

Eigen::VectorXd ParameterCodec::to_working(const Eigen::VectorXd& theta) const {
  if (theta.size() != size()) throw ValidationError("parameter vector has the wrong length");
  Eigen::VectorXd u(theta.size());
  for (int k = 0; k < size(); ++k) {
    u(k) = transforms_[k].to_working(theta(k));
    if (!std::isfinite(u(k))) throw ValidationError("parameter " + std::to_string(k + 1) + " is outside its range");
  }
  return u;
}

Eigen::VectorXd ParameterCodec::jacobian_diag(const Eigen::VectorXd& u) const {
  Eigen::VectorXd g(u.size());
  for (int k = 0; k < size(); ++k) g(k) = transforms_[k].dparam_du(u(k));
  return g;
}

AngularModel ParameterCodec::model(const Eigen::VectorXd& theta) const {
  if (theta.size() != size()) throw ValidationError("parameter vector has the wrong length");
  for (int k = 0; k < size(); ++k)
    if (!std::isfinite(theta(k))) throw ValidationError("parameters must be finite");
  if (family_ == Family::AsymLogistic) {
    std::vector<double> beta(theta.data() + 1, theta.data() + theta.size());
    return AngularModel::asym_logistic_exchangeable(theta(0), beta);
  }
  return AngularModel::from_parameters(family_, d_, std::span<const double>(theta.data(), theta.size()));
}

Eigen::VectorXd ParameterCodec::params_of(const AngularModel& m) const {
  if (m.family() != family_ || m.dim() != d_) throw ValidationError("model does not match the parameterization");
  if (family_ != Family::AsymLogistic) {
    const auto p = m.parameters();
    return Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
  }
  const auto& q = m.as<AsymLogisticParams>();
  const Subset all = full_set(d_);
  Eigen::VectorXd t(d_ + 1);
  t(0) = q.alpha[all];
  for (int j = 0; j < d_; ++j) t(j + 1) = q.beta(all, j);
  return t;
}

Eigen::VectorXd moment_start(Family f, const PointMatrix& W) {
  const int d = static_cast<int>(W.cols());
  const double n = static_cast<double>(W.rows());
  if (W.rows() == 0) throw ValidationError("no observations");
  const auto pairs = pair_list(d);
  // pairwise extremal coefficients d * E max(w_i, w_j), in [1, 2]
  std::vector<double> theta;
  for (auto [i, j] : pairs) {
    const double t = d * W.col(i).cwiseMax(W.col(j)).sum() / n;
    theta.push_back(std::clamp(t, 1.04, 1.98));
  }
  // dispersion: a symmetric Dirichlet(c) has E sum w_j^2 = (c + 1) / (d c + 1)
  const double s = W.array().square().rowwise().sum().mean();
  const double c = std::clamp((1.0 - s) / std::max(d * s - 1.0, 1e-6), 0.05, 50.0);

  Eigen::VectorXd t;
  switch (f) {
    case Family::TiltedDirichlet: t = Eigen::VectorXd::Constant(d, c); break;
    case Family::PairwiseBeta:
      t = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(pairs.size()) + 1);
      t(t.size() - 1) = c;
      break;
    case Family::HuslerReiss: {
      t.resize(static_cast<Eigen::Index>(pairs.size()));
      for (std::size_t k = 0; k < pairs.size(); ++k) t(k) = normal_quantile(theta[k] / 2.0);
      // shrink towards equal values until the partial correlations are valid
      for (int it = 0; it < 50; ++it) {
        try {
          AngularModel::husler_reiss(std::span<const double>(t.data(), t.size()), d);
          break;
        } catch (const ValidationError&) {
          t = 0.8 * t.array() + 0.2 * t.mean();
        }
      }
      break;
    }
    case Family::ExtremalT: {
      const double nu = 3.0;
      t.resize(static_cast<Eigen::Index>(pairs.size()) + 1);
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        // bivariate theta = 2 T_{nu+1}(sqrt(nu+1) sqrt((1-rho)/(1+rho)))
        const double x = student_t_quantile(theta[k] / 2.0, nu + 1.0) / std::sqrt(nu + 1.0);
        t(k) = std::clamp((1.0 - x * x) / (1.0 + x * x), -0.9, 0.95);
      }
      t(t.size() - 1) = nu;
      for (int it = 0; it < 50; ++it) {
        try {
          AngularModel::extremal_t(std::span<const double>(t.data(), t.size() - 1), nu, d);
          break;
        } catch (const ValidationError&) {
          t.head(t.size() - 1) *= 0.9;
        }
      }
      break;
    }
    case Family::AsymLogistic: {
      double mean_theta = 0.0;
      for (double v : theta) mean_theta += v / static_cast<double>(theta.size());
      t = Eigen::VectorXd::Constant(d + 1, 0.8);
      t(0) = std::clamp(std::log(2.0) / std::log(mean_theta), 1.05, 20.0);
      break;
    }
  }
  return t;
}

}  // namespace extdep
