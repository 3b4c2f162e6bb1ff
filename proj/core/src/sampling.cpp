#include "extdep/sampling.hpp"

#include "extdep/error.hpp"
#include "extdep/optim.hpp"
#include "logistic_quadrature.hpp"
#include "model_cache.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace extdep {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// All compositions of r into k nonnegative parts.
void compositions(int k, int r, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == k - 1) {
    cur.push_back(r);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int i = 0; i <= r; ++i) {
    cur.push_back(i);
    compositions(k, r - i, cur, out);
    cur.pop_back();
  }
}

class FaceSampler {
public:
  FaceSampler(const AngularModel& m, Subset S, double mass, std::uint64_t seed, const SamplingOptions& o)
      : m_(m), S_(S), k_(subset_size(S)), opts_(o) {
    info.face = S;
    info.mass = mass;
    for (int j = 0; j < m.dim(); ++j)
      if (subset_contains(S, j)) idx_.push_back(j);
    lw_.resize(k_);
    if (k_ == 1) {
      info.proposal = FaceProposal::Atom;
      info.expected_acceptance = 1.0;
      return;
    }
    std::mt19937_64 rng(splitmix64(seed ^ (0xa5a5a5a5ULL * S)));
    if (!setup_uniform(mass)) setup_logistic(rng, mass);
  }

  FaceSamplerInfo info;

  // Writes one draw into w (d entries); returns the number of proposals used.
  std::size_t draw(std::mt19937_64& rng, std::span<double> w, std::size_t budget) {
    std::fill(w.begin(), w.end(), 0.0);
    if (k_ == 1) {
      w[idx_[0]] = 1.0;
      return 1;
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t attempt = 1; attempt <= budget; ++attempt) {
      const double r = info.proposal == FaceProposal::Uniform ? propose_uniform(rng) : propose_logistic(rng);
      if (std::isnan(r)) throw SamplingError("density evaluation returned NaN");
      if (r > log_bound_) log_bound_ = r + std::log(opts_.bound_inflation);
      if (std::log(unif(rng)) < r - log_bound_) {
        for (int t = 0; t < k_; ++t) w[idx_[t]] = std::exp(lw_[t]);
        double s = 0.0;
        for (double x : w) s += x;
        for (double& x : w) x /= s;
        return attempt;
      }
    }
    throw SamplingError("rejection sampler exceeded its attempt budget on a face of dimension " +
                        std::to_string(k_ - 1));
  }

private:
  double log_f(std::span<const double> lw) const { return log_face_density_logw(m_, S_, lw); }

  // Grid search plus local refinement; rejects the uniform proposal when the
  // density grows without bound towards the boundary or acceptance is poor.
  bool setup_uniform(double mass) {
    const int res = k_ == 2 ? 400 : (k_ == 3 ? 80 : 30);
    std::vector<std::vector<int>> grid;
    std::vector<int> cur;
    compositions(k_, res, cur, grid);
    std::vector<double> lw(k_);
    auto eval = [&](const std::vector<int>& c, double eps) {
      double s = 0.0;
      for (int t = 0; t < k_; ++t) s += std::max(c[t] / double(res), eps);
      for (int t = 0; t < k_; ++t) lw[t] = std::log(std::max(c[t] / double(res), eps) / s);
      return log_f(lw);
    };
    double best = kNegInf;
    std::vector<std::pair<double, std::vector<int>>> top;
    for (const auto& c : grid) {
      const bool boundary = std::find(c.begin(), c.end(), 0) != c.end();
      const double v = eval(c, 1e-6);
      if (std::isnan(v)) throw SamplingError("density evaluation returned NaN");
      if (boundary) {
        const double v2 = eval(c, 1e-9);
        if (v2 > v + 0.5 && v2 > best - 5.0) return false;  // grows like w^-a near the boundary
        best = std::max(best, v2);
      }
      best = std::max(best, v);
      top.emplace_back(v, c);
    }
    if (!std::isfinite(best)) throw SamplingError("density vanishes on the whole grid");
    std::partial_sort(top.begin(), top.begin() + std::min<std::size_t>(3, top.size()), top.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; i < std::min<std::size_t>(3, top.size()); ++i) {
      Eigen::VectorXd z0(k_ - 1);
      const auto& c = top[i].second;
      const double last = std::max(c[k_ - 1] / double(res), 1e-6);
      for (int t = 0; t + 1 < k_; ++t) z0(t) = std::log(std::max(c[t] / double(res), 1e-6) / last);
      auto obj = [&](const Eigen::VectorXd& z) {
        std::vector<double> lwz(k_);
        detail::logistic_logw(std::span<const double>(z.data(), z.size()), lwz);
        return -log_f(lwz);
      };
      NelderMeadOptions no;
      no.ftol = 1e-10;
      no.max_iterations = 2000;
      no.initial_step = 0.05;
      best = std::max(best, -nelder_mead(obj, z0, no).value);
    }
    log_bound_ = best + std::log(opts_.bound_inflation);
    const double log_vol = -std::lgamma(static_cast<double>(k_));
    info.expected_acceptance = mass / std::exp(log_bound_ + log_vol);
    if (info.expected_acceptance < opts_.min_uniform_acceptance) return false;
    info.proposal = FaceProposal::Uniform;
    info.bound = std::exp(log_bound_);
    return true;
  }

  void setup_logistic(std::mt19937_64& rng, double mass) {
    info.proposal = FaceProposal::LogisticT;
    const int p = k_ - 1;
    mu_ = Eigen::VectorXd::Zero(p);
    set_scale(Eigen::MatrixXd::Identity(p, p) * std::pow(m_.cache().scale, 2));
    // Two rounds of self-normalized importance sampling locate the bulk of the
    // density in logistic coordinates.
    for (int round = 0; round < 2; ++round) {
      constexpr int kPilot = 20000;
      std::vector<double> lr(kPilot);
      std::vector<Eigen::VectorXd> zs(kPilot);
      double mx = kNegInf;
      for (int i = 0; i < kPilot; ++i) {
        lr[i] = propose_logistic(rng);
        zs[i] = z_;
        if (std::isnan(lr[i])) throw SamplingError("density evaluation returned NaN");
        mx = std::max(mx, lr[i]);
      }
      if (!std::isfinite(mx)) break;
      double wsum = 0.0, w2sum = 0.0;
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
      for (int i = 0; i < kPilot; ++i) {
        const double w = std::exp(lr[i] - mx);
        wsum += w;
        w2sum += w * w;
        mean += w * zs[i];
      }
      mean /= wsum;
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
      for (int i = 0; i < kPilot; ++i) {
        const Eigen::VectorXd c = zs[i] - mean;
        cov += std::exp(lr[i] - mx) * c * c.transpose();
      }
      cov /= wsum;
      if (wsum * wsum / w2sum < 50.0) cov += Eigen::MatrixXd::Identity(p, p) * 0.25;  // few effective draws
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
      if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < 1e-10) break;
      mu_ = mean;
      set_scale(cov);
    }

    // Bound on log f - log g from proposal draws, refined by local search.
    std::vector<std::pair<double, Eigen::VectorXd>> pts;
    pts.emplace_back(log_ratio_at(mu_), mu_);
    for (int i = 0; i < 4000; ++i) {
      const double r = propose_logistic(rng);
      pts.emplace_back(r, z_);
    }
    std::partial_sort(pts.begin(), pts.begin() + 3, pts.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    double best = pts.front().first;
    for (int i = 0; i < 3; ++i) {
      if (!std::isfinite(pts[i].first)) continue;
      NelderMeadOptions no;
      no.ftol = 1e-10;
      no.max_iterations = 2000;
      no.initial_step = 0.1;
      auto obj = [this](const Eigen::VectorXd& z) { return -log_ratio_at(z); };
      best = std::max(best, -nelder_mead(obj, pts[i].second, no).value);
    }
    if (!std::isfinite(best)) throw SamplingError("could not bound the density on the envelope");
    log_bound_ = best + std::log(opts_.bound_inflation);
    info.bound = log_bound_;
    info.expected_acceptance = mass * std::exp(-log_bound_);
  }

  void set_scale(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    chol_ = llt.matrixL();
    const double p = static_cast<double>(k_ - 1);
    log_norm_ = std::lgamma(0.5 * (kDf + p)) - std::lgamma(0.5 * kDf) - 0.5 * p * std::log(kDf * std::numbers::pi) -
                chol_.diagonal().array().log().sum();
  }

  double propose_uniform(std::mt19937_64& rng) {
    std::exponential_distribution<double> ex(1.0);
    double s = 0.0;
    for (int t = 0; t < k_; ++t) {
      lw_[t] = ex(rng);
      s += lw_[t];
    }
    for (int t = 0; t < k_; ++t) lw_[t] = std::log(lw_[t] / s);
    return log_f(lw_);
  }

  double log_envelope(const Eigen::VectorXd& z) const {
    const int p = k_ - 1;
    const Eigen::VectorXd x = chol_.triangularView<Eigen::Lower>().solve(z - mu_);
    return log_norm_ - 0.5 * (kDf + p) * std::log1p(x.squaredNorm() / kDf);
  }

  double log_ratio_at(const Eigen::VectorXd& z) {
    detail::logistic_logw(std::span<const double>(z.data(), z.size()), lw_);
    const double f = log_f(lw_);
    if (f == kNegInf) return kNegInf;
    double jac = 0.0;
    for (double v : lw_) jac += v;
    return f + jac - log_envelope(z);
  }

  double propose_logistic(std::mt19937_64& rng) {
    const int p = k_ - 1;
    std::normal_distribution<double> nd(0.0, 1.0);
    std::chi_squared_distribution<double> chi(kDf);
    Eigen::VectorXd x(p);
    for (int i = 0; i < p; ++i) x(i) = nd(rng);
    const double s = std::sqrt(kDf / chi(rng));
    z_ = mu_ + chol_ * x * s;
    return log_ratio_at(z_);
  }

  static constexpr double kDf = 3.0;

  const AngularModel& m_;
  Subset S_;
  int k_;
  SamplingOptions opts_;
  std::vector<int> idx_;
  std::vector<double> lw_;
  double log_bound_ = 0.0;
  Eigen::VectorXd mu_, z_;
  Eigen::MatrixXd chol_;
  double log_norm_ = 0.0;
};

std::vector<FaceMass> positive_faces(const AngularModel& m) {
  std::vector<FaceMass> faces;
  for (const auto& fm : mass_decomposition(m))
    if (fm.mass > 0.0) faces.push_back(fm);
  if (faces.empty()) throw SamplingError("angular measure has no positive mass");
  return faces;
}

}  // namespace

PointMatrix sample_angular(const AngularModel& m, std::size_t n, std::uint64_t seed, const SamplingOptions& opts) {
  const int d = m.dim();
  PointMatrix out(static_cast<Eigen::Index>(n), d);
  if (n == 0) return out;
  const auto faces = positive_faces(m);
  std::vector<double> cum;
  double total = 0.0;
  for (const auto& f : faces) cum.push_back(total += f.mass);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::size_t> label(n), count(faces.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = unif(rng) * total;
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    label[i] = std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), faces.size() - 1);
    ++count[label[i]];
  }

  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (count[f] == 0) continue;
    FaceSampler fs(m, faces[f].face, faces[f].mass, seed, opts);
    const std::size_t budget = opts.max_attempts_per_draw;
    for (std::size_t i = 0; i < n; ++i) {
      if (label[i] != f) continue;
      fs.draw(rng, std::span<double>(out.row(static_cast<Eigen::Index>(i)).data(), d), budget);
    }
  }
  return out;
}

std::vector<FaceSamplerInfo> describe_sampler(const AngularModel& m, std::uint64_t seed,
                                              const SamplingOptions& opts) {
  std::vector<FaceSamplerInfo> out;
  for (const auto& f : positive_faces(m)) out.push_back(FaceSampler(m, f.face, f.mass, seed, opts).info);
  return out;
}

}  // namespace extdep
