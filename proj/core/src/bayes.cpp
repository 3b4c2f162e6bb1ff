#include "extdep/bayes.hpp"

#include "extdep/diagnostics.hpp"
#include "extdep/error.hpp"
#include "extdep/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace extdep {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_normal_pdf(double x, double sd) {
  return -0.5 * (x / sd) * (x / sd) - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double type7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

double PriorSpec::log_density(const Eigen::VectorXd& theta) const {
  if (theta.size() != static_cast<Eigen::Index>(components.size()))
    throw ValidationError("parameter vector does not match the prior");
  double lp = 0.0;
  for (std::size_t k = 0; k < components.size(); ++k) {
    const double t = theta(static_cast<Eigen::Index>(k));
    const auto& c = components[k];
    switch (c.transform) {
      case PriorTransform::Log:
        if (!(t > 0.0)) return kNegInf;
        lp += log_normal_pdf(std::log(t), c.sd) - std::log(t);
        break;
      case PriorTransform::SignedLogitSquare: {
        // g(rho) = sign(rho) logit(rho^2) covers R once on each sign of rho,
        // so the induced density carries a factor 1/2.
        const double a = std::abs(t);
        if (!(a > 0.0 && a < 1.0)) return kNegInf;
        const double g = std::copysign(std::log(a * a / (1.0 - a * a)), t);
        lp += log_normal_pdf(g, c.sd) - std::log(a) - std::log1p(-a * a);
        break;
      }
      case PriorTransform::Identity: lp += log_normal_pdf(t, c.sd); break;
    }
  }
  return lp;
}

PriorSpec default_prior(Family f, int d) {
  if (f == Family::AsymLogistic) throw UnsupportedError("no default prior for the asymmetric logistic model");
  const ParameterCodec codec(f, d, ParameterCodec::Purpose::Posterior);
  PriorSpec p;
  p.family = f;
  p.d = d;
  const auto names = codec.names();
  for (std::size_t k = 0; k < names.size(); ++k) {
    const bool corr = f == Family::ExtremalT && k + 1 < names.size();
    p.components.push_back({names[k], corr ? PriorTransform::SignedLogitSquare : PriorTransform::Log, 3.0});
  }
  return p;
}

Eigen::VectorXd PosteriorChain::posterior_mean() const { return draws.colwise().mean().transpose(); }

RandomWalkResult random_walk_metropolis(const std::function<double(const Eigen::VectorXd&)>& log_target,
                                        const Eigen::VectorXd& start, const McmcOptions& opts) {
  if (opts.n_iter <= opts.burn_in) throw ValidationError("n_iter must exceed burn_in");
  if (!(opts.initial_sd > 0.0)) throw ValidationError("initial proposal sd must be positive");
  const Eigen::Index p = start.size();
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Eigen::VectorXd x = start, shape = Eigen::VectorXd::Constant(p, opts.initial_sd);
  double lx = log_target(x);
  if (!std::isfinite(lx)) throw ValidationError("MCMC start has zero posterior density");
  double log_scale = 0.0;
  const std::size_t keep = opts.n_iter - opts.burn_in;
  RandomWalkResult res;
  res.draws.resize(static_cast<Eigen::Index>(keep), p);

  // running moments for the shape update, taken over the second quarter of burn-in
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p), s2 = Eigen::VectorXd::Zero(p);
  std::size_t ns = 0, acc_burn = 0, acc_keep = 0;
  const std::size_t shape_from = opts.burn_in / 4, shape_at = opts.burn_in / 2;

  Eigen::VectorXd y(p);
  for (std::size_t it = 0; it < opts.n_iter; ++it) {
    const double sc = std::exp(log_scale);
    for (Eigen::Index k = 0; k < p; ++k) y(k) = x(k) + sc * shape(k) * nd(rng);
    const double ly = log_target(y);
    const double log_u = std::log(unif(rng));
    const bool accept = std::isfinite(ly) && log_u < ly - lx;
    if (accept) {
      x = y;
      lx = ly;
    }
    if (it < opts.burn_in) {
      acc_burn += accept;
      const double gain = 1.0 / std::pow(static_cast<double>(it) + 10.0, 0.6);
      log_scale += gain * ((accept ? 1.0 : 0.0) - opts.target_acceptance) * 3.0;
      if (it >= shape_from && it < shape_at) {
        s1 += x;
        s2 += x.cwiseProduct(x);
        ++ns;
      }
      if (it + 1 == shape_at && ns > 10) {
        const Eigen::VectorXd var = s2 / static_cast<double>(ns) - (s1 / static_cast<double>(ns)).cwiseAbs2();
        for (Eigen::Index k = 0; k < p; ++k)
          if (var(k) > 1e-12) shape(k) = std::sqrt(var(k)) * 2.38 / std::sqrt(static_cast<double>(p));
        log_scale = 0.0;
      }
    } else {
      acc_keep += accept;
      res.draws.row(static_cast<Eigen::Index>(it - opts.burn_in)) = x.transpose();
    }
  }
  res.acceptance_rate = static_cast<double>(acc_keep) / static_cast<double>(keep);
  res.burn_in_acceptance_rate =
      opts.burn_in > 0 ? static_cast<double>(acc_burn) / static_cast<double>(opts.burn_in) : 0.0;
  res.proposal_sd = shape * std::exp(log_scale);
  return res;
}

std::vector<ParameterSummary> summarize_draws(const Eigen::MatrixXd& draws, const std::vector<std::string>& names) {
  std::vector<ParameterSummary> out;
  for (Eigen::Index k = 0; k < draws.cols(); ++k) {
    ParameterSummary s;
    s.name = k < static_cast<Eigen::Index>(names.size()) ? names[static_cast<std::size_t>(k)] : "";
    std::vector<double> v(draws.col(k).data(), draws.col(k).data() + draws.rows());
    if (v.empty()) {
      out.push_back(s);
      continue;
    }
    const double n = static_cast<double>(v.size());
    for (double x : v) s.mean += x / n;
    for (double x : v) s.sd += (x - s.mean) * (x - s.mean);
    s.sd = v.size() > 1 ? std::sqrt(s.sd / (n - 1.0)) : 0.0;
    s.lower = type7(v, 0.025);
    s.upper = type7(v, 0.975);
    try {
      s.geweke_z = geweke(v);
    } catch (const ValidationError&) {
      s.geweke_z = std::numeric_limits<double>::quiet_NaN();
    }
    try {
      const auto hw = heidelberger_welch(v);
      s.hw_passed = hw.passed;
      s.hw_start = hw.start_index;
    } catch (const ValidationError&) {
      s.hw_passed = false;
    }
    out.push_back(s);
  }
  return out;
}

PosteriorChain mh_sample(Family family, const PointMatrix& W_in, const PriorSpec& prior, const McmcOptions& opts) {
  if (prior.family != family) throw ValidationError("prior does not match the family");
  if (family == Family::AsymLogistic) throw UnsupportedError("posterior sampling is not available for the asymmetric logistic model");
  const int d = W_in.rows() > 0 ? static_cast<int>(W_in.cols()) : prior.d;
  if (W_in.rows() == 0 && !opts.allow_empty) throw ValidationError("no observations to sample from");
  if (d != prior.d) throw ValidationError("prior dimension does not match the data");
  const PointMatrix W = nudge_interior(W_in);
  const ParameterCodec codec(family, d, ParameterCodec::Purpose::Posterior);
  if (static_cast<int>(prior.components.size()) != codec.size())
    throw ValidationError("prior has the wrong number of components");

  auto log_target = [&](const Eigen::VectorXd& u) {
    try {
      const Eigen::VectorXd theta = codec.to_params(u);
      const double lp = prior.log_density(theta);
      if (!std::isfinite(lp)) return kNegInf;
      const AngularModel m = codec.model(theta);  // validates even without data
      const double ll = W.rows() > 0 ? log_likelihood(m, W) : 0.0;
      return ll + lp + codec.jacobian_diag(u).array().abs().log().sum();
    } catch (const Error&) {
      return kNegInf;
    }
  };

  Eigen::VectorXd start = Eigen::VectorXd::Zero(codec.size());
  if (W.rows() > 0) {
    try {
      start = codec.to_working(moment_start(family, W));
    } catch (const Error&) {
    }
  }
  if (!std::isfinite(log_target(start))) start.setZero();

  const RandomWalkResult rw = random_walk_metropolis(log_target, start, opts);
  PosteriorChain chain;
  chain.family = family;
  chain.d = d;
  chain.names = codec.names();
  chain.draws.resize(rw.draws.rows(), rw.draws.cols());
  for (Eigen::Index i = 0; i < rw.draws.rows(); ++i) {
    const Eigen::VectorXd theta = codec.to_params(rw.draws.row(i).transpose());
    chain.draws.row(i) = theta.transpose();
  }
  chain.acceptance_rate = rw.acceptance_rate;
  chain.burn_in_acceptance_rate = rw.burn_in_acceptance_rate;
  chain.burn_in = opts.burn_in;
  chain.n_iter = opts.n_iter;
  chain.seed = opts.seed;
  chain.proposal_sd = rw.proposal_sd;
  chain.summaries = summarize_draws(chain.draws, chain.names);
  if (chain.acceptance_rate < 0.01 || chain.acceptance_rate > 0.95)
    chain.warnings.push_back("acceptance rate " + std::to_string(chain.acceptance_rate) + " outside [0.01, 0.95]");
  for (const auto& s : chain.summaries)
    if (!s.hw_passed) chain.warnings.push_back("Heidelberger-Welch test failed for " + s.name);
  return chain;
}

}  // namespace extdep
