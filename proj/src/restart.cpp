#include "rvr/restart.hpp"

#include <cmath>

#include "rvr/rng.hpp"

namespace rvr {

std::size_t restart_stage_count(double eps0, double eps) {
  if (!(eps0 > 0.0) || !(eps > 0.0) || !std::isfinite(eps0))
    throw ConfigError("restart accuracies must be positive and finite");
  const double k = std::ceil(std::log2(eps0 / eps));
  return k < 1.0 ? 1 : static_cast<std::size_t>(k);
}

double restart_accuracy(double eps0, std::size_t k) {
  return std::ldexp(eps0, -static_cast<int>(k));
}

namespace {

std::size_t ceil_count(double v) {
  if (!std::isfinite(v) || v > 1e12) throw ConfigError("restart budget is not finite");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(v)));
}

// Appends a stage trace, shifting IFO and epoch numbers past what is already
// there. The stage's initial record duplicates the previous stage end.
void append_trace(std::vector<TraceRecord>& all, std::vector<TraceRecord> stage,
                  std::uint64_t ifo_offset, std::size_t epoch_offset) {
  for (std::size_t i = all.empty() ? 0 : 1; i < stage.size(); ++i) {
    TraceRecord r = std::move(stage[i]);
    r.ifo += ifo_offset;
    r.epoch += epoch_offset;
    all.push_back(std::move(r));
  }
}

template <class Configure>
RestartResult run_stages(const StochasticProblem& problem, const OptimizerConfig& solver,
                         double eps0, double eps, const RunOptions& options,
                         Configure&& configure) {
  const std::size_t stages = restart_stage_count(eps0, eps);
  RunOptions stage_options = options;
  std::vector<RestartStage> log;
  std::vector<TraceRecord> trace;
  std::uint64_t ifo = 0;
  std::size_t epoch_offset = 0;
  std::optional<ManifoldPoint> x = options.initial;

  for (std::size_t k = 1; k <= stages; ++k) {
    OptimizerConfig c = solver;
    c.seed = derive_seed(solver.seed, Stream::Restart, k);
    RestartStage stage;
    stage.k = k;
    stage.epsilon = restart_accuracy(eps0, k);
    configure(c, stage);
    stage_options.initial = x;
    RunResult run = run_optimizer(problem, c, stage_options);
    ifo += run.ifo;
    const std::size_t stage_epochs =
        run.trace.empty() ? 0 : run.trace.back().epoch;
    append_trace(trace, std::move(run.trace), ifo - run.ifo, epoch_offset);
    epoch_offset += stage_epochs;
    x = run.output;
    const BatchEvaluation full = problem.evaluate_full(*x);
    stage.grad_norm = norm(*x, full.grad);
    stage.cost = full.cost;
    stage.ifo_end = ifo;
    log.push_back(stage);
  }
  return RestartResult{*x, std::move(log), std::move(trace), ifo};
}

}  // namespace

RestartResult run_restart_gd_vr(const StochasticProblem& problem, const OptimizerConfig& solver,
                                double eps0, double eps,
                                const std::optional<SmoothnessConstants>& constants,
                                const RunOptions& options) {
  const Algorithm a = solver.algorithm;
  if (!is_svrg_family(a) && !is_srg_family(a))
    throw ConfigError("restart over variance reduction needs an SVRG or SRG family solver");
  const double n = static_cast<double>(problem.size());
  if (constants) {
    constants->validate();
    if (!(constants->tau > 0.0)) throw ConfigError("restart needs tau > 0");
  }
  return run_stages(problem, solver, eps0, eps, options,
                    [&](OptimizerConfig& c, RestartStage& stage) {
                      if (constants) {
                        std::size_t m;
                        std::size_t b;
                        if (is_svrg_family(a)) {
                          m = std::max<std::size_t>(1, static_cast<std::size_t>(std::cbrt(n)));
                          b = std::min<std::size_t>(m * m, problem.size());
                        } else {
                          m = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(n)));
                          b = m;
                        }
                        const double eta = theoretical_step_size(*constants, m, b, 4.0, a);
                        c.inner_loop = m;
                        c.minibatch = b;
                        c.step = FixedStep{eta};
                        c.epochs = ceil_count(16.0 * constants->tau / (static_cast<double>(m) * eta));
                      }
                      const OptimizerConfig r = resolve(c, problem.size());
                      stage.inner_loop = r.inner_loop;
                      stage.minibatch = r.minibatch;
                      stage.budget = r.epochs;
                      if (const auto* f = std::get_if<FixedStep>(&r.step)) stage.step_size = f->eta;
                    });
}

RestartResult run_restart_sd_sgd(const StochasticProblem& problem, const OptimizerConfig& solver,
                                 double eps0, double eps,
                                 const std::optional<SmoothnessConstants>& constants,
                                 const RunOptions& options) {
  const Algorithm a = solver.algorithm;
  if (a != Algorithm::RSD && a != Algorithm::RSGD)
    throw ConfigError("restart over descent needs RSD or RSGD");
  if (constants) {
    constants->validate();
    if (!(constants->tau > 0.0) || !(constants->L > 0.0))
      throw ConfigError("restart needs tau > 0 and L > 0");
    if (a == Algorithm::RSGD && !(constants->G > 0.0)) throw ConfigError("R-SGD restart needs G > 0");
  }
  return run_stages(problem, solver, eps0, eps, options,
                    [&](OptimizerConfig& c, RestartStage& stage) {
                      c.output = OutputSelection::UniformRandomIterate;
                      if (constants) {
                        const double L = constants->L;
                        const double tau = constants->tau;
                        if (a == Algorithm::RSD) {
                          c.iterations = ceil_count(8.0 * L * tau);
                          c.step = FixedStep{1.0 / L};
                          c.line_search = false;
                        } else {
                          const double g2 = constants->G * constants->G;
                          const double prev = restart_accuracy(eps0, stage.k - 1);
                          c.iterations =
                              ceil_count(8.0 * L * g2 * tau / (stage.epsilon * stage.epsilon));
                          const double z = std::sqrt(2.0 * tau * prev * prev / (L * g2));
                          c.step = FixedStep{z / std::sqrt(static_cast<double>(c.iterations))};
                        }
                      }
                      const OptimizerConfig r = resolve(c, problem.size());
                      stage.minibatch = a == Algorithm::RSD ? problem.size() : r.minibatch;
                      stage.budget = r.iterations;
                      if (const auto* f = std::get_if<FixedStep>(&r.step)) stage.step_size = f->eta;
                    });
}

}  // namespace rvr
