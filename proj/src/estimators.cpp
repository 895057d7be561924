#include "rvr/estimators.hpp"

#include "rvr/errors.hpp"

namespace rvr {

namespace {

TangentVector corrected(const StochasticProblem& problem, const ManifoldPoint& x_t,
                        const ManifoldPoint& anchor, const TangentVector& v_anchor,
                        std::span<const std::size_t> batch, TransportKind transport) {
  if (!v_anchor.base().same_as(anchor))
    throw BasePointMismatch("estimator: anchor gradient is not based at the anchor point");
  if (x_t.same_as(anchor)) return v_anchor;
  TangentVector g_t = problem.rgrad_batch(x_t, batch);
  const TangentVector g_anchor = problem.rgrad_batch(anchor, batch);
  const TangentVector moved = transport_to(anchor, x_t, g_anchor - v_anchor, transport);
  g_t -= moved;
  return g_t;
}

}  // namespace

TangentVector svrg_estimator(const StochasticProblem& problem, const ManifoldPoint& x_t,
                             const ManifoldPoint& x_ref, const TangentVector& v_ref,
                             std::span<const std::size_t> batch, TransportKind transport) {
  return corrected(problem, x_t, x_ref, v_ref, batch, transport);
}

TangentVector srg_estimator(const StochasticProblem& problem, const ManifoldPoint& x_t,
                            const ManifoldPoint& x_prev, const TangentVector& v_prev,
                            std::span<const std::size_t> batch, TransportKind transport) {
  return corrected(problem, x_t, x_prev, v_prev, batch, transport);
}

}  // namespace rvr
