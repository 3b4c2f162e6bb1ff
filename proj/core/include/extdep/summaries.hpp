#pragma once

#include "extdep/angular_model.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace extdep {

// theta = V(1, ..., 1), in [1, d].
double extremal_coefficient(const AngularModel& m, double tol = 1e-6);
// chi = R(1, ..., 1), in [0, 1].
double chi_coefficient(const AngularModel& m, double tol = 1e-6);

struct ProbabilityEstimate {
  double value = 0.0;      // clipped to [0, 1]
  double raw = 0.0;        // before clipping
  bool clipped = false;
  std::vector<std::string> warnings;
};

// Thresholds are on the unit Frechet scale. An infinite
// threshold marks a coordinate that is not part of the event.
ProbabilityEstimate prob_union_exceed(const AngularModel& m, std::span<const double> y, double tol = 1e-6);
ProbabilityEstimate prob_failure_region(const AngularModel& m, std::span<const double> y, double tol = 1e-6);

// Failure-region mass by quadrature for every family (inclusion-exclusion on
// V when some coordinates are not involved). Used as a cross-check of the
// closed forms.
double failure_mass_quadrature(const AngularModel& m, std::span<const double> y, double tol = 1e-6);

// Level y_j solving prob_failure_region(y) = p with the other thresholds
// fixed (entry j of fixed is ignored). Relative tolerance 1e-8.
double joint_return_level(const AngularModel& m, double p, int j, std::span<const double> fixed,
                          double tol = 1e-7);

// Contour {(y_i, y_j) : prob_failure_region = p} as a polyline ordered by
// increasing y_i, log-spaced in y_i.
std::vector<std::pair<double, double>> joint_return_contour(const AngularModel& m, double p, int i, int j,
                                                            std::span<const double> fixed, int points = 60,
                                                            double tol = 1e-7);

}  // namespace extdep
