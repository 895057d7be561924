#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "rvr/optimizer.hpp"

namespace rvr {

// K = ⌈log₂(ε₀/ε)⌉ (at least 1).
std::size_t restart_stage_count(double eps0, double eps);

// ε_k = ε₀ 2^{-k}.
double restart_accuracy(double eps0, std::size_t k);

struct RestartStage {
  std::size_t k = 0;
  double epsilon = 0.0;
  double grad_norm = 0.0;  // ‖grad f‖ at the stage output
  double cost = 0.0;
  std::uint64_t ifo_end = 0;
  std::size_t inner_loop = 0;  // m_k (VR solvers)
  std::size_t minibatch = 0;   // b_k
  std::size_t budget = 0;      // S_k epochs or T_k iterations
  double step_size = 0.0;
};

struct RestartResult {
  ManifoldPoint output;
  std::vector<RestartStage> stages;
  std::vector<TraceRecord> trace;  // concatenated, IFO cumulative across stages
  std::uint64_t ifo = 0;
};

// Halving schedule over an SVRG/SRG-family solver, warm-started between
// stages. With constants, m_k, b_k, η and S_k = ⌈16τ/(m_k η)⌉ follow the
// theoretical prescriptions; otherwise the solver config is reused as given.
RestartResult run_restart_gd_vr(const StochasticProblem& problem, const OptimizerConfig& solver,
                                double eps0, double eps,
                                const std::optional<SmoothnessConstants>& constants = std::nullopt,
                                const RunOptions& options = {});

// Same schedule over R-SD or R-SGD. Each stage outputs a uniformly random inner
// iterate. With constants, R-SD uses T_k = ⌈8Lτ⌉, η = 1/L and R-SGD uses
// T_k = ⌈8LG²τ/ε_k²⌉, η = z/√T_k with z = √(2τε_{k-1}²/(LG²)).
RestartResult run_restart_sd_sgd(const StochasticProblem& problem, const OptimizerConfig& solver,
                                 double eps0, double eps,
                                 const std::optional<SmoothnessConstants>& constants = std::nullopt,
                                 const RunOptions& options = {});

}  // namespace rvr
