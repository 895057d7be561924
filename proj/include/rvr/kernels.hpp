#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <span>
#include <vector>

#include <Eigen/Dense>

#ifdef _OPENMP
#include <omp.h>
#endif

// Batch reductions over component indices. The parallel kernel splits the
// batch into fixed-size blocks, sums each block left to right, then combines
// the block partials with a pairwise tree in a fixed order. The result depends
// only on the batch, never on the thread count or schedule.
namespace rvr::kernels {

using Index = std::size_t;

inline constexpr std::size_t kBlockSize = 64;

struct Partial {
  double cost = 0.0;
  Eigen::MatrixXd grad;
};

// Leaf signature: void(Index component, double* cost_acc, Eigen::MatrixXd* grad_acc)
// with either pointer possibly null when that quantity is not requested.

template <class Leaf>
Partial reduce_block(std::span<const Index> idx, Eigen::Index rows, Eigen::Index cols,
                     bool want_cost, bool want_grad, const Leaf& leaf) {
  Partial p;
  if (want_grad) p.grad = Eigen::MatrixXd::Zero(rows, cols);
  for (Index i : idx) leaf(i, want_cost ? &p.cost : nullptr, want_grad ? &p.grad : nullptr);
  return p;
}

inline void tree_combine(std::vector<Partial>& parts, bool want_grad) {
  for (std::size_t stride = 1; stride < parts.size(); stride *= 2) {
    for (std::size_t i = 0; i + stride < parts.size(); i += 2 * stride) {
      parts[i].cost += parts[i + stride].cost;
      if (want_grad) parts[i].grad += parts[i + stride].grad;
    }
  }
}

// Sum of leaf contributions over idx (not averaged).
template <class Leaf>
Partial reduce_parallel(std::span<const Index> idx, Eigen::Index rows, Eigen::Index cols,
                        bool want_cost, bool want_grad, const Leaf& leaf) {
  const std::size_t blocks = (idx.size() + kBlockSize - 1) / kBlockSize;
  if (blocks <= 1) return reduce_block(idx, rows, cols, want_cost, want_grad, leaf);
  std::vector<Partial> parts(blocks);
  // Exceptions must not escape the parallel region; keep the one from the
  // lowest failing block so the reported error is deterministic too.
  std::vector<std::exception_ptr> errors(blocks);
  const long long nblocks = static_cast<long long>(blocks);
#pragma omp parallel for schedule(static)
  for (long long b = 0; b < nblocks; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kBlockSize;
    const std::size_t len = std::min(kBlockSize, idx.size() - begin);
    try {
      parts[static_cast<std::size_t>(b)] =
          reduce_block(idx.subspan(begin, len), rows, cols, want_cost, want_grad, leaf);
    } catch (...) {
      errors[static_cast<std::size_t>(b)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  tree_combine(parts, want_grad);
  return std::move(parts.front());
}

// Reference: plain left-to-right accumulation, no blocking, no threads.
template <class Leaf>
Partial reduce_serial(std::span<const Index> idx, Eigen::Index rows, Eigen::Index cols,
                      bool want_cost, bool want_grad, const Leaf& leaf) {
  return reduce_block(idx, rows, cols, want_cost, want_grad, leaf);
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace rvr::kernels
