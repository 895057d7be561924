#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rvr/errors.hpp"
#include "rvr/manifold.hpp"
#include "rvr/problem.hpp"
#include "rvr/step_size.hpp"
#include "rvr/trace.hpp"

namespace rvr {

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& name);
bool is_adaptive(Algorithm algorithm);
bool is_svrg_family(Algorithm algorithm);
bool is_srg_family(Algorithm algorithm);
bool is_spider_family(Algorithm algorithm);

struct FixedBatch {
  std::size_t size = 0;  // 0 means n
};

enum class BatchSetting { FiniteSum, Online };

// B^s = min{⌈c_β/β_s⌉, n} (finite-sum) or min{⌈c_β/β_s⌉, ⌈α₂σ²/ε²⌉} (online),
// clamped to [1, n]; the first epoch uses `initial`.
struct AdaptiveBatch {
  double c_beta = std::numeric_limits<double>::infinity();
  std::size_t initial = 50;
  BatchSetting setting = BatchSetting::FiniteSum;
  double epsilon = 0.0;        // online accuracy ε
  double alpha2_sigma2 = 0.0;  // online numerator α₂σ²
  // When set, c_β is replaced by α₁ · σ̂² with σ̂² the empirical gradient
  // variance at the initial point.
  std::optional<double> alpha1;
};

using BatchSchedule = std::variant<FixedBatch, AdaptiveBatch>;

// beta = nullopt means no previous epoch statistic (first epoch).
std::size_t adapt_batch_size(const AdaptiveBatch& schedule, std::optional<double> beta,
                             std::size_t n);

enum class OutputSelection { LastIterate, UniformRandomIterate };

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::RSVRG;
  StepSizePolicy step = FixedStep{1e-3};
  std::size_t inner_loop = 0;  // m; 0 means ⌊√n⌋
  std::size_t minibatch = 0;   // b (S₂ for SPIDER); 0 means ⌊√n⌋ (1 for R-SGD)
  std::size_t epochs = 10;     // S, SVRG/SRG families
  std::size_t iterations = 0;  // K, SPIDER family / R-SD / R-SGD
  std::size_t period = 0;      // p, SPIDER family; 0 means ⌊√n⌋
  BatchSchedule batch = FixedBatch{};
  TransportKind transport = TransportKind::Projection;
  RetractionMode retraction = RetractionMode::FirstOrder;
  std::uint64_t seed = 0;
  OutputSelection output = OutputSelection::LastIterate;
  bool line_search = false;  // R-SD Armijo backtracking
  std::optional<std::uint64_t> ifo_budget;
  std::size_t trace_interval = 1;  // record every k-th iterate (epoch ends always)
  bool record_time = true;
  double divergence_factor = 1e6;
};

// Resolves defaults (m, b, p, batch sizes) against n and validates.
OptimizerConfig resolve(const OptimizerConfig& config, std::size_t n);

// Extra per-record measurements supplied by the caller.
struct RunOptions {
  std::optional<ManifoldPoint> initial;
  std::optional<double> optimal_cost;
  std::function<double(const ManifoldPoint&)> test_metric;
  std::string label;  // algorithm column; defaults to the algorithm name
  std::size_t repetition = 0;
};

struct EpochLog {
  std::size_t epoch = 0;
  std::size_t batch = 0;      // B^s (S₁ for SPIDER periods)
  std::size_t inner = 0;      // m_s (steps actually taken)
  std::size_t minibatch = 0;  // b_s
  double beta = 0.0;          // statistic handed to the next epoch
  std::uint64_t ifo_end = 0;
};

struct RunResult {
  ManifoldPoint output;
  ManifoldPoint last;
  std::vector<TraceRecord> trace;
  std::vector<EpochLog> epochs;
  std::uint64_t ifo = 0;
  double wall_ms = 0.0;
  std::size_t gap_clips = 0;
  std::vector<std::string> events;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, RunResult partial)
      : Error(what), partial_(std::move(partial)) {}
  const RunResult& partial() const { return partial_; }

 private:
  RunResult partial_;
};

RunResult run_svrg_family(const StochasticProblem& problem, const OptimizerConfig& config,
                          const RunOptions& options = {});
RunResult run_srg_family(const StochasticProblem& problem, const OptimizerConfig& config,
                         const RunOptions& options = {});
RunResult run_spider_family(const StochasticProblem& problem, const OptimizerConfig& config,
                            const RunOptions& options = {});
RunResult run_rsd(const StochasticProblem& problem, const OptimizerConfig& config,
                  const RunOptions& options = {});
RunResult run_rsgd(const StochasticProblem& problem, const OptimizerConfig& config,
                   const RunOptions& options = {});

// Dispatches on config.algorithm.
RunResult run_optimizer(const StochasticProblem& problem, const OptimizerConfig& config,
                        const RunOptions& options = {});

}  // namespace rvr
