#pragma once

#include "extdep/angular_model.hpp"

#include <cstddef>
#include <cstdint>

namespace extdep {

struct SamplingOptions {
  // Proposals allowed per accepted draw (plus a fixed allowance) before a
  // SamplingError is raised.
  std::size_t max_attempts_per_draw = 100000;
  double bound_inflation = 1.2;
  // Uniform-on-simplex proposals are used only when the expected acceptance
  // rate is at least this; otherwise a Student-t envelope in additive-logistic
  // coordinates takes over.
  double min_uniform_acceptance = 0.05;
};

// How draws on one face were generated.
enum class FaceProposal { Atom, Uniform, LogisticT };

struct FaceSamplerInfo {
  Subset face = 0;
  double mass = 0.0;
  FaceProposal proposal = FaceProposal::Atom;
  double bound = 0.0;            // final density bound (log scale for LogisticT)
  double expected_acceptance = 0.0;
};

// n draws from H: atoms, lower-dimensional faces and the interior in
// proportion to their masses. Reproducible for a given seed.
PointMatrix sample_angular(const AngularModel& m, std::size_t n, std::uint64_t seed,
                           const SamplingOptions& opts = {});

// Envelope choices made by sample_angular for each face carrying mass.
std::vector<FaceSamplerInfo> describe_sampler(const AngularModel& m, std::uint64_t seed,
                                              const SamplingOptions& opts = {});

}  // namespace extdep
