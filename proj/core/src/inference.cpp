#include "extdep/inference.hpp"

#include "extdep/error.hpp"
#include "extdep/optim.hpp"

#include <algorithm>
#include <cstring>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace extdep {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_interior(const PointMatrix& W) {
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      if (!(W(i, j) > 0.0)) throw ValidationError("row " + std::to_string(i) + " is not strictly inside the simplex");
      s += W(i, j);
    }
    if (std::abs(s - 1.0) > 1e-8) throw ValidationError("row " + std::to_string(i) + " does not sum to 1");
  }
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& A) { return 0.5 * (A + A.transpose()); }

}  // namespace

PointMatrix nudge_interior(const PointMatrix& W) {
  PointMatrix out = W;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    bool moved = false;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      if (!std::isfinite(out(i, j))) throw ValidationError("angles must be finite");
      if (out(i, j) < kBoundaryNudge) {
        out(i, j) = kBoundaryNudge;
        moved = true;
      }
    }
    if (moved) out.row(i) /= out.row(i).sum();
  }
  return out;
}

std::uint64_t data_fingerprint(const PointMatrix& W) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(W.rows()));
  mix(static_cast<std::uint64_t>(W.cols()));
  for (Eigen::Index i = 0; i < W.size(); ++i) {
    std::uint64_t bits;
    const double v = W.data()[i];
    std::memcpy(&bits, &v, sizeof bits);
    mix(bits);
  }
  return h;
}

Eigen::VectorXd log_density_terms(const AngularModel& m, const PointMatrix& W) {
  if (W.cols() != m.dim()) throw ValidationError("angle matrix has the wrong number of columns");
  check_interior(W);
  Eigen::VectorXd out(W.rows());
  std::vector<double> lw(static_cast<std::size_t>(W.cols()));
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    for (Eigen::Index j = 0; j < W.cols(); ++j) lw[j] = std::log(W(i, j));
    out(i) = log_angular_density_logw(m, lw);
  }
  return out;
}

double log_likelihood(const AngularModel& m, const PointMatrix& W) {
  const Eigen::VectorXd t = log_density_terms(m, W);
  double s = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (t(i) == kNegInf) return kNegInf;
    s += t(i);
  }
  return s;
}

double bic(double loglik, int p, std::size_t m) {
  if (m < 1) throw ValidationError("BIC needs at least one observation");
  return -2.0 * loglik + p * (std::log(static_cast<double>(m)) + std::log(2.0 * std::numbers::pi));
}

double tic(const FitResult& fit) {
  if (!fit.covariance_ok) throw CovarianceError("sensitivity matrix is singular; TIC undefined");
  const Eigen::MatrixXd KJinv = fit.K * fit.J.inverse();
  return -2.0 * (fit.loglik - KJinv.trace());
}

FitResult evaluate_fit(const ParameterCodec& codec, const Eigen::VectorXd& theta, const PointMatrix& W,
                       double fd_step) {
  const int p = codec.size();
  const auto m = static_cast<std::size_t>(W.rows());
  const double md = static_cast<double>(m);
  FitResult fit(codec.model(theta));
  fit.names = codec.names();
  fit.theta_hat = theta;
  fit.working_hat = codec.to_working(theta);
  fit.m = m;
  fit.fingerprint = data_fingerprint(W);
  fit.loglik = log_likelihood(fit.model, W);
  if (!std::isfinite(fit.loglik)) throw EstimationError("log-likelihood is not finite at the estimate");
  fit.bic = bic(fit.loglik, p, m);
  fit.tic = std::numeric_limits<double>::quiet_NaN();
  fit.J = Eigen::MatrixXd::Zero(p, p);
  fit.K = Eigen::MatrixXd::Zero(p, p);
  fit.sandwich_cov = Eigen::MatrixXd::Constant(p, p, std::numeric_limits<double>::quiet_NaN());
  fit.std_errors = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
  if (m == 0) return fit;

  const Eigen::VectorXd& u = fit.working_hat;
  auto terms = [&](const Eigen::VectorXd& v) { return log_density_terms(codec.model(codec.to_params(v)), W); };
  auto ll = [&](const Eigen::VectorXd& v) { return terms(v).sum(); };
  Eigen::VectorXd h(p);
  for (int k = 0; k < p; ++k) h(k) = fd_step * std::max(1.0, std::abs(u(k)));

  try {
    Eigen::MatrixXd scores(static_cast<Eigen::Index>(m), p);
    Eigen::VectorXd fp(p), fm(p);
    for (int k = 0; k < p; ++k) {
      Eigen::VectorXd up = u, um = u;
      up(k) += h(k);
      um(k) -= h(k);
      const Eigen::VectorXd tp = terms(up), tm = terms(um);
      scores.col(k) = (tp - tm) / (2.0 * h(k));
      fp(k) = tp.sum();
      fm(k) = tm.sum();
    }
    fit.K = symmetrize(scores.transpose() * scores / md);
    Eigen::MatrixXd H(p, p);
    for (int a = 0; a < p; ++a) {
      H(a, a) = (fp(a) - 2.0 * fit.loglik + fm(a)) / (h(a) * h(a));
      for (int b = 0; b < a; ++b) {
        Eigen::VectorXd v = u;
        v(a) += h(a), v(b) += h(b);
        const double fpp = ll(v);
        v(b) -= 2 * h(b);
        const double fpm = ll(v);
        v(a) -= 2 * h(a);
        const double fmm = ll(v);
        v(b) += 2 * h(b);
        const double fmp = ll(v);
        H(a, b) = H(b, a) = (fpp - fpm - fmp + fmm) / (4.0 * h(a) * h(b));
      }
    }
    fit.J = symmetrize(-H / md);
  } catch (const Error& e) {
    fit.warnings.push_back(std::string("finite differences failed: ") + e.what());
    return fit;
  }
  if (!fit.J.allFinite() || !fit.K.allFinite()) {
    fit.warnings.push_back("non-finite derivative estimates");
    return fit;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fit.J);
  const double emax = es.eigenvalues().cwiseAbs().maxCoeff();
  if (es.info() != Eigen::Success || es.eigenvalues().cwiseAbs().minCoeff() <= 1e-10 * std::max(emax, 1e-300)) {
    fit.warnings.push_back("sensitivity matrix J is singular; no sandwich covariance");
    return fit;
  }
  if (es.eigenvalues().minCoeff() <= 0.0) fit.warnings.push_back("J is not positive definite; not a local maximum");
  const Eigen::MatrixXd Jinv = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
                               es.eigenvectors().transpose();
  const Eigen::MatrixXd Vu = symmetrize(Jinv * fit.K * Jinv / md);
  const Eigen::VectorXd g = codec.jacobian_diag(u);
  fit.sandwich_cov = symmetrize(g.asDiagonal() * Vu * g.asDiagonal());
  fit.std_errors = fit.sandwich_cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.covariance_ok = true;
  fit.tic = -2.0 * (fit.loglik - (fit.K * Jinv).trace());
  return fit;
}

FitResult fit_mle(Family family, const PointMatrix& W_in, const FitOptions& opts) {
  if (W_in.rows() == 0) throw ValidationError("no observations to fit");
  const int d = static_cast<int>(W_in.cols());
  const PointMatrix W = nudge_interior(W_in);
  const ParameterCodec codec(family, d);
  const int p = codec.size();
  std::vector<std::string> warnings;
  if (static_cast<double>(W.rows()) < 5.0 * p) {
    if (!opts.allow_small_sample)
      throw ValidationError("need at least 5 observations per parameter (m = " + std::to_string(W.rows()) +
                            ", p = " + std::to_string(p) + ")");
    warnings.push_back("fewer than 5 observations per parameter");
  }
  if (opts.starts < 1) throw ValidationError("at least one optimizer start is required");

  auto objective = [&](const Eigen::VectorXd& u) {
    try {
      return -log_likelihood(codec.model(codec.to_params(u)), W);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(p);
  try {
    u0 = codec.to_working(moment_start(family, W));
  } catch (const Error&) {
    warnings.push_back("moment-based start unavailable; starting from the working-scale origin");
  }

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> nd(0.0, opts.start_spread);
  NelderMeadOptions no;
  no.ftol = opts.ftol;
  no.max_iterations = opts.max_iterations;
  no.initial_step = 0.5;
  no.restarts = 1;

  std::vector<StartReport> reports;
  int best = -1;
  NelderMeadResult best_res;
  int total_iter = 0, total_eval = 0;
  for (int s = 0; s < opts.starts; ++s) {
    Eigen::VectorXd start = u0;
    if (s > 0)
      for (int k = 0; k < p; ++k) start(k) += nd(rng);
    const NelderMeadResult r = nelder_mead(objective, start, no);
    total_iter += r.iterations;
    total_eval += r.evaluations;
    StartReport rep{s, -r.value, r.converged, r.iterations, ""};
    if (!std::isfinite(r.value)) rep.message = "no finite likelihood reached";
    else if (!r.converged) rep.message = "iteration limit reached";
    reports.push_back(rep);
    if (!std::isfinite(r.value)) continue;
    const bool better = best < 0 || (r.converged && !reports[best].converged) ||
                        (r.converged == reports[best].converged && r.value < best_res.value);
    if (better) {
      best = s;
      best_res = r;
    }
  }
  if (best < 0) {
    std::ostringstream os;
    os << "all " << opts.starts << " optimizer starts failed for " << family_name(family) << ":";
    for (const auto& r : reports) os << " [start " << r.index << ": " << r.message << "]";
    throw OptimizationError(os.str());
  }

  FitResult fit = evaluate_fit(codec, codec.to_params(best_res.x), W, opts.fd_step);
  fit.converged = reports[best].converged;
  fit.best_start = best;
  fit.iterations = total_iter;
  fit.evaluations = total_eval;
  fit.starts = std::move(reports);
  fit.warnings.insert(fit.warnings.begin(), warnings.begin(), warnings.end());
  if (!fit.converged) fit.warnings.push_back("optimizer did not converge");
  if (family == Family::ExtremalT) {
    const double nu = fit.theta_hat(p - 1);
    if (nu < 0.5 * 1.001 || nu > 50.0 * 0.999) fit.warnings.push_back("nu estimate at the optimization bound");
  }
  return fit;
}

std::vector<RankEntry> select_model(const std::vector<FitResult>& fits, Criterion c) {
  if (fits.size() < 2) throw ValidationError("model selection needs at least two fits");
  for (const auto& f : fits)
    if (f.fingerprint != fits.front().fingerprint || f.m != fits.front().m)
      throw ValidationError("fits were computed on different data");
  std::vector<RankEntry> out;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const auto& f = fits[i];
    double v = c == Criterion::BIC ? f.bic : (f.covariance_ok ? f.tic : std::numeric_limits<double>::infinity());
    out.push_back({i, f.family(), v, f.parameter_count()});
  }
  std::stable_sort(out.begin(), out.end(), [](const RankEntry& a, const RankEntry& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.parameters < b.parameters;
  });
  return out;
}

}  // namespace extdep
