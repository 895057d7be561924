#include "rvr/gradient_check.hpp"

#include <algorithm>
#include <cmath>

#include "rvr/errors.hpp"
#include "rvr/rng.hpp"

namespace rvr {

double directional_error(const StochasticProblem& problem, const ManifoldPoint& x,
                         const TangentVector& xi, double t, RetractionMode mode) {
  const double slope = inner(x, problem.rgrad_full(x), xi);
  const double plus = problem.pullback_cost(x, t * TangentVector(xi), mode);
  const double minus = problem.pullback_cost(x, -t * TangentVector(xi), mode);
  const double fd = (plus - minus) / (2.0 * t);
  return std::abs(fd - slope) / std::max(1.0, std::abs(slope));
}

GradientCheckReport check_gradients(const StochasticProblem& problem, std::size_t points,
                                    std::size_t directions, double t, std::uint64_t seed,
                                    RetractionMode mode) {
  if (points == 0 || directions == 0) throw ConfigError("gradient check needs points and directions");
  if (!(t > 0.0)) throw ConfigError("gradient check step t must be positive");
  GradientCheckReport report;
  report.points = points;
  report.directions = directions;
  report.t = t;
  for (std::size_t p = 0; p < points; ++p) {
    Rng point_rng(seed, Stream::GradientCheck, p);
    const ManifoldPoint x = random_point(problem.manifold(), point_rng);
    for (std::size_t j = 0; j < directions; ++j) {
      Rng dir_rng(seed, Stream::GradientCheck, p, j + 1);
      const TangentVector xi = random_tangent(x, dir_rng);
      report.max_rel_error =
          std::max(report.max_rel_error, directional_error(problem, x, xi, t, mode));
    }
  }
  return report;
}

}  // namespace rvr
