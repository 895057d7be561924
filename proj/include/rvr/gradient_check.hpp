#pragma once

#include <cstddef>
#include <cstdint>

#include "rvr/manifold.hpp"
#include "rvr/problem.hpp"

namespace rvr {

struct GradientCheckReport {
  std::size_t points = 0;
  std::size_t directions = 0;
  double t = 0.0;
  double max_rel_error = 0.0;
  double threshold = 1e-5;
  bool passed() const { return max_rel_error <= threshold; }
};

// Central differences (f(R_x(tξ)) − f(R_x(−tξ)))/(2t) against ⟨grad f(x), ξ⟩_x
// over random points and unit tangents; error relative to max(1, |⟨grad f, ξ⟩|).
GradientCheckReport check_gradients(const StochasticProblem& problem, std::size_t points,
                                    std::size_t directions, double t, std::uint64_t seed,
                                    RetractionMode mode = RetractionMode::FirstOrder);

// Relative error of one directional derivative.
double directional_error(const StochasticProblem& problem, const ManifoldPoint& x,
                         const TangentVector& xi, double t, RetractionMode mode);

}  // namespace rvr
