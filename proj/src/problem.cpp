#include "rvr/problem.hpp"

#include <numeric>

#include "rvr/errors.hpp"
#include "rvr/kernels.hpp"

namespace rvr {

namespace {

enum class Want { Cost, Grad, Both };

template <bool Parallel>
kernels::Partial reduce(const StochasticProblem& p, const ComponentEvaluator& ev,
                        std::span<const std::size_t> batch, Want want) {
  if (batch.empty()) throw ConfigError("empty batch");
  const std::size_t n = p.size();
  for (std::size_t i : batch)
    if (i >= n) throw ConfigError("batch index out of range");
  const auto& d = p.manifold();
  const bool want_cost = want != Want::Grad;
  const bool want_grad = want != Want::Cost;
  auto leaf = [&ev](std::size_t i, double* c, Eigen::MatrixXd* g) { ev.accumulate(i, c, g); };
  if constexpr (Parallel)
    return kernels::reduce_parallel(batch, d.rows(), d.cols(), want_cost, want_grad, leaf);
  else
    return kernels::reduce_serial(batch, d.rows(), d.cols(), want_cost, want_grad, leaf);
}

}  // namespace

double StochasticProblem::cost_batch(const ManifoldPoint& x,
                                     std::span<const std::size_t> batch) const {
  const auto ev = bind(x);
  return reduce<true>(*this, *ev, batch, Want::Cost).cost / static_cast<double>(batch.size());
}

TangentVector StochasticProblem::rgrad_batch(const ManifoldPoint& x,
                                             std::span<const std::size_t> batch) const {
  const auto ev = bind(x);
  auto part = reduce<true>(*this, *ev, batch, Want::Grad);
  part.grad /= static_cast<double>(batch.size());
  return ev->finish(part.grad);
}

BatchEvaluation StochasticProblem::evaluate_batch(const ManifoldPoint& x,
                                                  std::span<const std::size_t> batch) const {
  const auto ev = bind(x);
  auto part = reduce<true>(*this, *ev, batch, Want::Both);
  const double inv = 1.0 / static_cast<double>(batch.size());
  part.grad *= inv;
  return {part.cost * inv, ev->finish(part.grad)};
}

BatchEvaluation StochasticProblem::evaluate_batch_serial(
    const ManifoldPoint& x, std::span<const std::size_t> batch) const {
  const auto ev = bind(x);
  auto part = reduce<false>(*this, *ev, batch, Want::Both);
  const double inv = 1.0 / static_cast<double>(batch.size());
  part.grad *= inv;
  return {part.cost * inv, ev->finish(part.grad)};
}

double StochasticProblem::cost_full(const ManifoldPoint& x) const {
  return cost_batch(x, all_indices());
}
TangentVector StochasticProblem::rgrad_full(const ManifoldPoint& x) const {
  return rgrad_batch(x, all_indices());
}
BatchEvaluation StochasticProblem::evaluate_full(const ManifoldPoint& x) const {
  return evaluate_batch(x, all_indices());
}

double StochasticProblem::pullback_cost(const ManifoldPoint& x, const TangentVector& xi,
                                        RetractionMode mode) const {
  return cost_full(retract(x, xi, mode));
}

const std::vector<std::size_t>& StochasticProblem::all_indices() const {
  std::call_once(all_once_, [this] {
    all_.resize(size());
    std::iota(all_.begin(), all_.end(), std::size_t{0});
  });
  return all_;
}

double gradient_variance(const StochasticProblem& problem, const ManifoldPoint& x) {
  const auto ev = problem.bind(x);
  const TangentVector full = problem.rgrad_full(x);
  const auto& d = problem.manifold();
  double total = 0.0;
  for (std::size_t i = 0; i < problem.size(); ++i) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d.rows(), d.cols());
    ev->accumulate(i, nullptr, &g);
    const TangentVector diff = ev->finish(g) - full;
    total += inner(x, diff, diff);
  }
  return total / static_cast<double>(problem.size());
}

}  // namespace rvr
