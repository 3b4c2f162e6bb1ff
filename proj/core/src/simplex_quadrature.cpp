#include "extdep/simplex_quadrature.hpp"

#include "extdep/error.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <utility>
#include <vector>

namespace extdep {

namespace {

struct RuleNode {
  std::vector<double> bary;  // n+1 barycentric weights
  double weight;             // includes n! so that Q = |det| * sum
};

double factorial(int n) { return std::tgamma(n + 1.0); }

void compositions(int total, int parts, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int v = 0; v <= total; ++v) {
    cur.push_back(v);
    compositions(total - v, parts - 1, cur, out);
    cur.pop_back();
  }
}

// Grundmann-Moller rule of degree 2s+1 on the n-simplex.
std::vector<RuleNode> gm_rule(int s, int n) {
  const int deg = 2 * s + 1;
  std::vector<RuleNode> nodes;
  for (int i = 0; i <= s; ++i) {
    const double denom = deg + n - 2 * i;
    const double c = ((i % 2) ? -1.0 : 1.0) * std::pow(2.0, -2.0 * s) * std::pow(denom, deg) /
                     (factorial(i) * factorial(deg + n - i));
    std::vector<std::vector<int>> comps;
    std::vector<int> cur;
    compositions(s - i, n + 1, cur, comps);
    for (const auto& beta : comps) {
      RuleNode node;
      node.weight = c;
      for (int b : beta) node.bary.push_back((2.0 * b + 1.0) / denom);
      nodes.push_back(std::move(node));
    }
  }
  return nodes;
}

struct Cell {
  std::vector<std::vector<double>> v;  // n+1 vertices in R^n
  double value;
  double error;
  bool operator<(const Cell& o) const { return error < o.error; }
};

class Integrator {
public:
  Integrator(const SimplexFunction& f, int d) : f_(f), d_(d), n_(d - 1), hi_(gm_rule(3, d - 1)), lo_(gm_rule(2, d - 1)) {
    point_.resize(d);
  }

  void evaluate(Cell& c) {
    const auto [hi, lo] = rules(c);
    c.value = hi;
    c.error = std::abs(hi - lo);
  }

  static std::pair<Cell, Cell> split(const Cell& c) {
    const int n = static_cast<int>(c.v.size()) - 1;
    int ea = 0, eb = 1;
    double best = -1.0;
    for (int a = 0; a <= n; ++a) {
      for (int b = a + 1; b <= n; ++b) {
        double len = 0.0;
        for (int j = 0; j < n; ++j) len += (c.v[a][j] - c.v[b][j]) * (c.v[a][j] - c.v[b][j]);
        if (len > best) {
          best = len;
          ea = a;
          eb = b;
        }
      }
    }
    std::vector<double> mid(n);
    for (int j = 0; j < n; ++j) mid[j] = 0.5 * (c.v[ea][j] + c.v[eb][j]);
    Cell left{c.v, 0.0, 0.0}, right{c.v, 0.0, 0.0};
    left.v[eb] = mid;
    right.v[ea] = mid;
    return {std::move(left), std::move(right)};
  }

  std::size_t evaluations() const { return evals_; }

private:
  std::pair<double, double> rules(const Cell& c) {
    edge_determinant(c);
    double qh = 0.0, ql = 0.0;
    for (const auto& node : hi_) qh += node.weight * eval_at(c, node.bary);
    for (const auto& node : lo_) ql += node.weight * eval_at(c, node.bary);
    return {det_ * qh, det_ * ql};
  }

  void edge_determinant(const Cell& c) {
    // |det| of edge vectors via Gaussian elimination on a small n x n matrix
    std::vector<double> m(n_ * n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m[i * n_ + j] = c.v[i + 1][j] - c.v[0][j];
    double det = 1.0;
    for (int col = 0; col < n_; ++col) {
      int piv = col;
      for (int r = col + 1; r < n_; ++r)
        if (std::abs(m[r * n_ + col]) > std::abs(m[piv * n_ + col])) piv = r;
      if (m[piv * n_ + col] == 0.0) {
        det_ = 0.0;
        return;
      }
      if (piv != col) {
        for (int j = 0; j < n_; ++j) std::swap(m[piv * n_ + j], m[col * n_ + j]);
      }
      det *= m[col * n_ + col];
      for (int r = col + 1; r < n_; ++r) {
        const double fct = m[r * n_ + col] / m[col * n_ + col];
        for (int j = col; j < n_; ++j) m[r * n_ + j] -= fct * m[col * n_ + j];
      }
    }
    det_ = std::abs(det);
  }

  double eval_at(const Cell& c, const std::vector<double>& bary) {
    double last = 1.0;
    for (int j = 0; j < n_; ++j) {
      double x = 0.0;
      for (int k = 0; k <= n_; ++k) x += bary[k] * c.v[k][j];
      point_[j] = x;
      last -= x;
    }
    point_[n_] = std::max(last, 0.0);
    ++evals_;
    const double v = f_(point_);
    if (!std::isfinite(v)) throw NumericError("integrand is not finite inside the simplex");
    return v;
  }

  const SimplexFunction& f_;
  int d_;
  int n_;
  std::vector<RuleNode> hi_, lo_;
  std::vector<double> point_;
  double det_ = 0.0;
  std::size_t evals_ = 0;
};

}  // namespace

QuadratureResult integrate_simplex(const SimplexFunction& f, int d, double tol, std::size_t max_evaluations) {
  if (d < 2 || d > 4) throw UnsupportedError("integrate_simplex supports d in {2, 3, 4}");
  if (!(tol > 0)) throw ValidationError("tolerance must be positive");
  const int n = d - 1;
  Integrator integ(f, d);
  Cell root;
  root.v.assign(n + 1, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) root.v[i + 1][i] = 1.0;
  integ.evaluate(root);

  std::priority_queue<Cell> heap;
  double total = root.value, err = root.error;
  heap.push(std::move(root));
  while (err > tol) {
    if (integ.evaluations() >= max_evaluations)
      throw NumericError("simplex quadrature budget exhausted", total, err);
    Cell c = heap.top();
    heap.pop();
    auto [left, right] = Integrator::split(c);
    integ.evaluate(left);
    integ.evaluate(right);
    total += left.value + right.value - c.value;
    err += left.error + right.error - c.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
    if (heap.size() % 4096 == 0) {
      // refresh running sums against drift
      double t = 0.0, e = 0.0;
      auto copy = heap;
      while (!copy.empty()) {
        t += copy.top().value;
        e += copy.top().error;
        copy.pop();
      }
      total = t;
      err = e;
    }
  }
  return {total, err, integ.evaluations()};
}

}  // namespace extdep
