#pragma once

#include <cstddef>
#include <span>

#include "rvr/manifold.hpp"
#include "rvr/problem.hpp"

namespace rvr {

// v_t = grad f_I(x_t) − T_{x_ref}^{x_t}(grad f_I(x_ref) − v_ref).
// Returns v_ref unchanged when x_t is the reference point.
TangentVector svrg_estimator(const StochasticProblem& problem, const ManifoldPoint& x_t,
                             const ManifoldPoint& x_ref, const TangentVector& v_ref,
                             std::span<const std::size_t> batch, TransportKind transport);

// v_t = grad f_I(x_t) − T_{x_prev}^{x_t}(grad f_I(x_prev) − v_prev).
// Returns v_prev unchanged when x_t is x_prev.
TangentVector srg_estimator(const StochasticProblem& problem, const ManifoldPoint& x_t,
                            const ManifoldPoint& x_prev, const TangentVector& v_prev,
                            std::span<const std::size_t> batch, TransportKind transport);

}  // namespace rvr
