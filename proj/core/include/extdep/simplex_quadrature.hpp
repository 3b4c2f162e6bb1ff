#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace extdep {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

// f receives all d coordinates of a point in the open unit simplex.
using SimplexFunction = std::function<double(std::span<const double>)>;

// Integral of f over the simplex, parameterized by its first d-1 coordinates
// (so f == 1 integrates to 1/(d-1)!). Adaptive bisection of the longest edge
// with a degree-7 Grundmann-Moller rule and a degree-5 companion for the error.
// Throws NumericError carrying the best estimate if the evaluation budget runs
// out before the absolute error estimate drops below tol.
// Both rules use interior nodes only, so a kink (e.g. max_j w_j / y_j) that
// cuts a cell near a corner goes unseen and the result is biased while the
// error estimate looks fine. Integrands must be smooth inside the simplex;
// boundary singularities are fine.
QuadratureResult integrate_simplex(const SimplexFunction& f, int d, double tol,
                                   std::size_t max_evaluations = 4'000'000);

}  // namespace extdep
