#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "rvr/manifold.hpp"

namespace rvr {

// Component costs/gradients bound to one point x. accumulate() must be safe to
// call concurrently for different components.
class ComponentEvaluator {
 public:
  virtual ~ComponentEvaluator() = default;

  // Adds f_i(x) to *cost and component i's raw gradient contribution to
  // *grad. Either pointer may be null.
  virtual void accumulate(std::size_t i, double* cost, Eigen::MatrixXd* grad) const = 0;

  // Linear map from an averaged raw gradient to the Riemannian gradient at x.
  virtual TangentVector finish(const Eigen::MatrixXd& raw) const = 0;
};

struct BatchEvaluation {
  double cost;
  TangentVector grad;
};

// Finite sum f(x) = (1/n) Σ f_i(x) over one manifold. Batch quantities are
// averages over the batch (multiplicity counted).
class StochasticProblem {
 public:
  virtual ~StochasticProblem() = default;

  virtual const ManifoldDescriptor& manifold() const = 0;
  virtual std::size_t size() const = 0;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<ComponentEvaluator> bind(const ManifoldPoint& x) const = 0;

  double cost_batch(const ManifoldPoint& x, std::span<const std::size_t> batch) const;
  TangentVector rgrad_batch(const ManifoldPoint& x, std::span<const std::size_t> batch) const;
  BatchEvaluation evaluate_batch(const ManifoldPoint& x, std::span<const std::size_t> batch) const;

  double cost_full(const ManifoldPoint& x) const;
  TangentVector rgrad_full(const ManifoldPoint& x) const;
  BatchEvaluation evaluate_full(const ManifoldPoint& x) const;

  // f(R_x(ξ)). Overrides may evaluate in a frame attached to x so that nearby
  // curve points lose no accuracy to rounding of the retracted point.
  virtual double pullback_cost(const ManifoldPoint& x, const TangentVector& xi,
                               RetractionMode mode) const;

  // Same quantities through the serial reference kernel.
  BatchEvaluation evaluate_batch_serial(const ManifoldPoint& x,
                                        std::span<const std::size_t> batch) const;

  const std::vector<std::size_t>& all_indices() const;

 private:
  mutable std::once_flag all_once_;
  mutable std::vector<std::size_t> all_;
};

// (1/n) Σ ‖grad f_i(x) − grad f(x)‖².
double gradient_variance(const StochasticProblem& problem, const ManifoldPoint& x);

}  // namespace rvr
