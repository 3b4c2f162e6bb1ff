#include "extdep/angular_model.hpp"

#include "extdep/error.hpp"
#include "model_cache.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

namespace extdep {

namespace {

constexpr int kMaxDim = 4;

void check_dim(int d, int lo = 2) {
  if (d < lo) throw ValidationError("dimension must be at least " + std::to_string(lo));
  if (d > kMaxDim) throw UnsupportedError("dimensions above 4 are not supported");
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0; }

Eigen::MatrixXd symmetric_from_pairs(std::span<const double> pairs, int d, double diag) {
  if (static_cast<int>(pairs.size()) != d * (d - 1) / 2)
    throw ValidationError("expected " + std::to_string(d * (d - 1) / 2) + " pairwise parameters");
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(d, d, diag);
  std::size_t p = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) m(i, j) = m(j, i) = pairs[p++];
  return m;
}

void prepare_kernel(detail::ModelCache& c, const CorrelationMatrix& r0) {
  Eigen::LLT<Eigen::MatrixXd> llt(r0.matrix());
  if (llt.info() != Eigen::Success) return;
  Eigen::MatrixXd L = llt.matrixL();
  if (L.diagonal().minCoeff() < 1e-10) return;
  c.chol0_inv = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(L.rows(), L.cols()));
  c.logdet0 = 2.0 * L.diagonal().array().log().sum();
  c.density_ok = true;
}

}  // namespace

std::string_view family_code(Family f) {
  switch (f) {
    case Family::AsymLogistic: return "AL";
    case Family::TiltedDirichlet: return "TD";
    case Family::PairwiseBeta: return "PB";
    case Family::HuslerReiss: return "HR";
    case Family::ExtremalT: return "ET";
  }
  return "?";
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::AsymLogistic: return "asymmetric_logistic";
    case Family::TiltedDirichlet: return "tilted_dirichlet";
    case Family::PairwiseBeta: return "pairwise_beta";
    case Family::HuslerReiss: return "husler_reiss";
    case Family::ExtremalT: return "extremal_t";
  }
  return "?";
}

Family parse_family(std::string_view s) {
  for (Family f : {Family::AsymLogistic, Family::TiltedDirichlet, Family::PairwiseBeta, Family::HuslerReiss,
                   Family::ExtremalT}) {
    if (s == family_code(f) || s == family_name(f)) return f;
  }
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::toupper(ch); });
  for (Family f : {Family::AsymLogistic, Family::TiltedDirichlet, Family::PairwiseBeta, Family::HuslerReiss,
                   Family::ExtremalT}) {
    if (lower == family_code(f)) return f;
  }
  throw ValidationError("unknown model family '" + std::string(s) + "'");
}

bool has_closed_form_exponent(Family f) { return f != Family::TiltedDirichlet && f != Family::PairwiseBeta; }

std::vector<std::pair<int, int>> pair_list(int d) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) out.emplace_back(i, j);
  return out;
}

AsymLogisticParams AsymLogisticParams::exchangeable(double alpha, std::span<const double> beta) {
  AsymLogisticParams p;
  p.d = static_cast<int>(beta.size());
  check_dim(p.d);
  const int n = 1 << p.d;
  p.alpha.assign(n, 1.0);
  p.beta = Eigen::MatrixXd::Zero(n, p.d);
  const Subset all = full_set(p.d);
  p.alpha[all] = alpha;
  for (int j = 0; j < p.d; ++j) {
    p.beta(all, j) = beta[j];
    p.beta(Subset{1} << j, j) = 1.0 - beta[j];
  }
  return p;
}

AngularModel::AngularModel(AsymLogisticParams p) : params_(std::move(p)) {
  const auto& q = std::get<AsymLogisticParams>(params_);
  d_ = q.d;
  check_dim(d_);
  const int n = 1 << d_;
  if (static_cast<int>(q.alpha.size()) != n || q.beta.rows() != n || q.beta.cols() != d_)
    throw ValidationError("asymmetric logistic parameter block has the wrong shape");
  for (Subset S = 1; S < static_cast<Subset>(n); ++S) {
    if (subset_size(S) >= 2 && !(std::isfinite(q.alpha[S]) && q.alpha[S] >= 1.0))
      throw ValidationError("asymmetric logistic alpha_S must be >= 1");
  }
  for (int j = 0; j < d_; ++j) {
    double sum = 0.0;
    for (Subset S = 1; S < static_cast<Subset>(n); ++S) {
      const double b = q.beta(S, j);
      if (!subset_contains(S, j)) {
        if (b != 0.0) throw ValidationError("beta_(j,S) must be zero when j is not in S");
        continue;
      }
      if (!(b >= 0.0 && b <= 1.0)) throw ValidationError("beta_(j,S) must lie in [0, 1]");
      sum += b;
    }
    if (std::abs(sum - 1.0) > 1e-10) throw ValidationError("beta_(j,.) must sum to one for every j");
  }
  init();
}

AngularModel::AngularModel(TiltedDirichletParams p) : params_(std::move(p)) {
  const auto& q = std::get<TiltedDirichletParams>(params_);
  d_ = static_cast<int>(q.alpha.size());
  check_dim(d_);
  for (int j = 0; j < d_; ++j)
    if (!finite_positive(q.alpha(j))) throw ValidationError("tilted Dirichlet alpha_j must be positive");
  init();
}

AngularModel::AngularModel(PairwiseBetaParams p) : params_(std::move(p)) {
  const auto& q = std::get<PairwiseBetaParams>(params_);
  d_ = static_cast<int>(q.beta.rows());
  if (d_ < 3) throw ValidationError("pairwise beta model requires d >= 3");
  check_dim(d_, 3);
  if (q.beta.cols() != d_) throw ValidationError("pairwise beta matrix must be square");
  if (!finite_positive(q.alpha)) throw ValidationError("pairwise beta alpha must be positive");
  for (auto [i, j] : pair_list(d_)) {
    if (!finite_positive(q.beta(i, j)) || q.beta(i, j) != q.beta(j, i))
      throw ValidationError("pairwise beta beta_ij must be positive and symmetric");
  }
  init();
}

AngularModel::AngularModel(HuslerReissParams p) : params_(std::move(p)) {
  const auto& q = std::get<HuslerReissParams>(params_);
  d_ = static_cast<int>(q.lambda.rows());
  check_dim(d_);
  if (q.lambda.cols() != d_) throw ValidationError("lambda must be square");
  for (auto [i, j] : pair_list(d_)) {
    if (!finite_positive(q.lambda(i, j)) || q.lambda(i, j) != q.lambda(j, i))
      throw ValidationError("Husler-Reiss lambda_ij must be positive and symmetric");
  }
  init();
}

AngularModel::AngularModel(ExtremalTParams p) : params_(std::move(p)) {
  const auto& q = std::get<ExtremalTParams>(params_);
  d_ = q.rho.dim();
  check_dim(d_);
  if (!finite_positive(q.nu)) throw ValidationError("extremal-t nu must be positive");
  for (auto [i, j] : pair_list(d_)) {
    if (!(std::abs(q.rho(i, j)) < 1.0)) throw ValidationError("extremal-t correlations must satisfy |rho| < 1");
  }
  init();
}

AngularModel AngularModel::tilted_dirichlet(std::span<const double> alpha) {
  TiltedDirichletParams p;
  p.alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
  return AngularModel(std::move(p));
}

AngularModel AngularModel::pairwise_beta(double alpha, std::span<const double> beta_pairs, int d) {
  if (d < 3) throw ValidationError("pairwise beta model requires d >= 3");
  check_dim(d, 3);
  PairwiseBetaParams p;
  p.alpha = alpha;
  p.beta = symmetric_from_pairs(beta_pairs, d, 0.0);
  return AngularModel(std::move(p));
}

AngularModel AngularModel::husler_reiss(std::span<const double> lambda_pairs, int d) {
  check_dim(d);
  HuslerReissParams p;
  p.lambda = symmetric_from_pairs(lambda_pairs, d, 0.0);
  return AngularModel(std::move(p));
}

AngularModel AngularModel::extremal_t(std::span<const double> rho_pairs, double nu, int d) {
  check_dim(d);
  ExtremalTParams p;
  for (double r : rho_pairs)
    if (!(std::abs(r) < 1.0)) throw ValidationError("extremal-t correlations must satisfy |rho| < 1");
  try {
    p.rho = CorrelationMatrix(symmetric_from_pairs(rho_pairs, d, 1.0));
  } catch (const NumericError& e) {
    throw ValidationError(std::string("extremal-t correlation matrix: ") + e.what());
  }
  p.nu = nu;
  return AngularModel(std::move(p));
}

AngularModel AngularModel::asym_logistic_exchangeable(double alpha, std::span<const double> beta) {
  return AngularModel(AsymLogisticParams::exchangeable(alpha, beta));
}

AngularModel AngularModel::from_parameters(Family f, int d, std::span<const double> theta) {
  check_dim(d);
  const auto np = static_cast<std::size_t>(d * (d - 1) / 2);
  auto need = [&](std::size_t n) {
    if (theta.size() != n)
      throw ValidationError(std::string(family_name(f)) + " with d = " + std::to_string(d) + " needs " +
                            std::to_string(n) + " parameters, got " + std::to_string(theta.size()));
  };
  switch (f) {
    case Family::TiltedDirichlet:
      need(static_cast<std::size_t>(d));
      return tilted_dirichlet(theta);
    case Family::PairwiseBeta:
      need(np + 1);
      return pairwise_beta(theta[np], theta.first(np), d);
    case Family::HuslerReiss:
      need(np);
      return husler_reiss(theta, d);
    case Family::ExtremalT:
      need(np + 1);
      return extremal_t(theta.first(np), theta[np], d);
    case Family::AsymLogistic: {
      AsymLogisticParams p;
      p.d = d;
      const int n = 1 << d;
      p.alpha.assign(n, 1.0);
      p.beta = Eigen::MatrixXd::Zero(n, d);
      std::size_t total = 0;
      for (Subset S = 1; S < static_cast<Subset>(n); ++S) total += (subset_size(S) >= 2) + subset_size(S);
      need(total);
      std::size_t k = 0;
      for (Subset S = 1; S < static_cast<Subset>(n); ++S)
        if (subset_size(S) >= 2) p.alpha[S] = theta[k++];
      for (Subset S = 1; S < static_cast<Subset>(n); ++S)
        for (int j = 0; j < d; ++j)
          if (subset_contains(S, j)) p.beta(S, j) = theta[k++];
      return AngularModel(std::move(p));
    }
  }
  throw ValidationError("unknown family");
}

Family AngularModel::family() const noexcept { return static_cast<Family>(params_.index()); }

void AngularModel::init() {
  auto c = std::make_shared<detail::ModelCache>();
  c->log_d = std::log(static_cast<double>(d_));
  switch (family()) {
    case Family::AsymLogistic: {
      const auto& q = as<AsymLogisticParams>();
      double amin = 1e9;
      for (Subset S = 1; S < (Subset{1} << d_); ++S) {
        if (subset_size(S) >= 2 && q.beta.row(S).sum() > 0 && q.alpha[S] > 1.0) amin = std::min(amin, q.alpha[S]);
      }
      c->scale = amin < 1e9 ? std::clamp(1.0 / (amin - 1.0), 1.0, 200.0) : 1.0;
      break;
    }
    case Family::TiltedDirichlet: {
      const auto& a = as<TiltedDirichletParams>().alpha;
      double lc = std::lgamma(a.sum() + 1.0) - c->log_d;
      for (int j = 0; j < d_; ++j) lc += std::log(a(j)) - std::lgamma(a(j));
      c->td_log_const = lc;
      c->scale = std::clamp(1.0 / a.minCoeff(), 1.0, 200.0);
      break;
    }
    case Family::PairwiseBeta: {
      const auto& q = as<PairwiseBetaParams>();
      const double d = d_, a = q.alpha;
      c->pb_log_const = std::log(2.0) + std::lgamma(d - 2.0) + std::lgamma(a * d + 1.0) - std::log(d) -
                        std::log(d - 1.0) - std::lgamma(2.0 * a + 1.0) - std::lgamma(a * (d - 2.0));
      double mn = a;
      for (auto [i, j] : pair_list(d_)) {
        const double b = q.beta(i, j);
        c->pb_pair_const.push_back(std::lgamma(2.0 * b) - 2.0 * std::lgamma(b));
        mn = std::min(mn, b);
      }
      c->scale = std::clamp(1.0 / mn, 1.0, 200.0);
      break;
    }
    case Family::HuslerReiss: {
      const auto& lam = as<HuslerReissParams>().lambda;
      for (int j = 0; j < d_; ++j) c->partial.push_back(partial_corr_hr(lam, j));
      prepare_kernel(*c, c->partial[0]);
      double mx = 0.0;
      for (auto [i, j] : pair_list(d_)) mx = std::max(mx, lam(i, j));
      c->scale = std::clamp(2.0 * mx, 1.0, 200.0);
      break;
    }
    case Family::ExtremalT: {
      const auto& q = as<ExtremalTParams>();
      for (int j = 0; j < d_; ++j) c->partial.push_back(partial_corr_et(q.rho, j));
      prepare_kernel(*c, c->partial[0]);
      c->scale = std::clamp(q.nu, 1.0, 200.0);
      break;
    }
  }
  cache_ = std::move(c);
}

std::vector<double> AngularModel::parameters() const {
  std::vector<double> out;
  switch (family()) {
    case Family::AsymLogistic: {
      const auto& q = as<AsymLogisticParams>();
      for (Subset S = 1; S < (Subset{1} << d_); ++S)
        if (subset_size(S) >= 2) out.push_back(q.alpha[S]);
      for (Subset S = 1; S < (Subset{1} << d_); ++S)
        for (int j = 0; j < d_; ++j)
          if (subset_contains(S, j)) out.push_back(q.beta(S, j));
      break;
    }
    case Family::TiltedDirichlet: {
      const auto& a = as<TiltedDirichletParams>().alpha;
      out.assign(a.data(), a.data() + a.size());
      break;
    }
    case Family::PairwiseBeta: {
      const auto& q = as<PairwiseBetaParams>();
      for (auto [i, j] : pair_list(d_)) out.push_back(q.beta(i, j));
      out.push_back(q.alpha);
      break;
    }
    case Family::HuslerReiss: {
      const auto& lam = as<HuslerReissParams>().lambda;
      for (auto [i, j] : pair_list(d_)) out.push_back(lam(i, j));
      break;
    }
    case Family::ExtremalT: {
      const auto& q = as<ExtremalTParams>();
      for (auto [i, j] : pair_list(d_)) out.push_back(q.rho(i, j));
      out.push_back(q.nu);
      break;
    }
  }
  return out;
}

namespace {
std::string subset_label(Subset S, int d) {
  std::string s;
  for (int j = 0; j < d; ++j)
    if (subset_contains(S, j)) s += std::to_string(j + 1);
  return s;
}
}  // namespace

std::vector<std::string> AngularModel::parameter_names() const {
  std::vector<std::string> out;
  auto pairs = [&](const std::string& stem) {
    for (auto [i, j] : pair_list(d_)) out.push_back(stem + "_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  };
  switch (family()) {
    case Family::AsymLogistic:
      for (Subset S = 1; S < (Subset{1} << d_); ++S)
        if (subset_size(S) >= 2) out.push_back("alpha_" + subset_label(S, d_));
      for (Subset S = 1; S < (Subset{1} << d_); ++S)
        for (int j = 0; j < d_; ++j)
          if (subset_contains(S, j)) out.push_back("beta_" + std::to_string(j + 1) + "_" + subset_label(S, d_));
      break;
    case Family::TiltedDirichlet:
      for (int j = 0; j < d_; ++j) out.push_back("alpha_" + std::to_string(j + 1));
      break;
    case Family::PairwiseBeta:
      pairs("beta");
      out.push_back("alpha");
      break;
    case Family::HuslerReiss:
      pairs("lambda");
      break;
    case Family::ExtremalT:
      pairs("rho");
      out.push_back("nu");
      break;
  }
  return out;
}

}  // namespace extdep
