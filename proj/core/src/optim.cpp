#include "extdep/optim.hpp"

#include "extdep/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace extdep {

namespace {

struct Run {
  const std::function<double(const Eigen::VectorXd&)>& f;
  int evals = 0;
  double operator()(const Eigen::VectorXd& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }
};

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& opts) {
  const int n = static_cast<int>(x0.size());
  if (n == 0) throw ValidationError("Nelder-Mead needs at least one parameter");
  Run eval{f};
  NelderMeadResult res;
  res.x = x0;
  res.value = eval(x0);
  int total_iter = 0;

  for (int attempt = 0; attempt <= opts.restarts; ++attempt) {
    std::vector<Eigen::VectorXd> pts(n + 1, res.x);
    std::vector<double> fv(n + 1, res.value);
    for (int i = 0; i < n; ++i) {
      pts[i + 1](i) += opts.initial_step * (attempt == 0 ? 1.0 : 0.25);
      fv[i + 1] = eval(pts[i + 1]);
    }
    std::vector<int> order(n + 1);
    bool converged = false;
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
      const int best = order.front(), worst = order.back(), second = order[n - 1];
      if (std::isfinite(fv[worst]) && fv[worst] - fv[best] <= opts.ftol) {
        converged = true;
        break;
      }
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (int i = 0; i <= n; ++i)
        if (i != worst) centroid += pts[i];
      centroid /= n;
      const Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
      const double fr = eval(xr);
      if (fr < fv[best]) {
        const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
        const double fe = eval(xe);
        if (fe < fr) {
          pts[worst] = xe;
          fv[worst] = fe;
        } else {
          pts[worst] = xr;
          fv[worst] = fr;
        }
        continue;
      }
      if (fr < fv[second]) {
        pts[worst] = xr;
        fv[worst] = fr;
        continue;
      }
      const bool outside = fr < fv[worst];
      const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                         : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
      const double fc = eval(xc);
      if (fc < (outside ? fr : fv[worst])) {
        pts[worst] = xc;
        fv[worst] = fc;
        continue;
      }
      for (int i = 0; i <= n; ++i) {
        if (i == best) continue;
        pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
        fv[i] = eval(pts[i]);
      }
    }
    total_iter += iter;
    const int best = static_cast<int>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    const bool improved = fv[best] < res.value - opts.ftol;
    if (fv[best] <= res.value) {
      res.x = pts[best];
      res.value = fv[best];
    }
    res.converged = converged;
    if (!converged) break;
    if (attempt > 0 && !improved) break;
  }
  res.iterations = total_iter;
  res.evaluations = eval.evals;
  return res;
}

}  // namespace extdep
