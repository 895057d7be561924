#include "rvr/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "rvr/estimators.hpp"
#include "rvr/rng.hpp"
#include "rvr/sampling.hpp"

namespace rvr {

// ---------------------------------------------------------------- names

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::RSD: return "RSD";
    case Algorithm::RSGD: return "RSGD";
    case Algorithm::RSVRG: return "RSVRG";
    case Algorithm::RAbaSVRG: return "RAbaSVRG";
    case Algorithm::RSRG: return "RSRG";
    case Algorithm::RAbaSRG: return "RAbaSRG";
    case Algorithm::RSPIDER: return "RSPIDER";
    case Algorithm::RAbaSPIDER: return "RAbaSPIDER";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::RSD, Algorithm::RSGD, Algorithm::RSVRG, Algorithm::RAbaSVRG,
                      Algorithm::RSRG, Algorithm::RAbaSRG, Algorithm::RSPIDER,
                      Algorithm::RAbaSPIDER})
    if (to_string(a) == name) return a;
  throw ConfigError("unknown algorithm '" + name + "'");
}

bool is_adaptive(Algorithm a) {
  return a == Algorithm::RAbaSVRG || a == Algorithm::RAbaSRG || a == Algorithm::RAbaSPIDER;
}
bool is_svrg_family(Algorithm a) { return a == Algorithm::RSVRG || a == Algorithm::RAbaSVRG; }
bool is_srg_family(Algorithm a) { return a == Algorithm::RSRG || a == Algorithm::RAbaSRG; }
bool is_spider_family(Algorithm a) { return a == Algorithm::RSPIDER || a == Algorithm::RAbaSPIDER; }

// ---------------------------------------------------------------- batch sizes

std::size_t adapt_batch_size(const AdaptiveBatch& s, std::optional<double> beta, std::size_t n) {
  if (n < 1) throw ConfigError("adapt_batch_size: n must be positive");
  if (!beta) return std::clamp<std::size_t>(s.initial, 1, n);
  auto ceil_clamped = [n](double v) -> std::size_t {
    if (!(v < static_cast<double>(n))) return n;  // also catches +inf and NaN
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(v)), 1, n);
  };
  std::size_t b = ceil_clamped(s.c_beta / *beta);
  if (s.setting == BatchSetting::Online)
    b = std::min(b, ceil_clamped(s.alpha2_sigma2 / (s.epsilon * s.epsilon)));
  return b;
}

// ---------------------------------------------------------------- config

OptimizerConfig resolve(const OptimizerConfig& in, std::size_t n) {
  if (n < 1) throw ConfigError("problem has no components");
  OptimizerConfig c = in;
  const auto root = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
  const Algorithm a = c.algorithm;
  if (c.inner_loop == 0) c.inner_loop = root;
  if (c.minibatch == 0) c.minibatch = a == Algorithm::RSGD ? 1 : root;
  if (c.period == 0) c.period = root;
  if (c.minibatch > n) throw ConfigError("mini-batch size b must not exceed n");
  if (c.trace_interval == 0) throw ConfigError("trace_interval must be positive");
  if (!(c.divergence_factor > 0.0)) throw ConfigError("divergence_factor must be positive");

  if (auto* sp = std::get_if<SpiderAdaptiveStep>(&c.step); sp && sp->period == 0)
    sp->period = c.period;
  validate(c.step);
  const bool spider_step = std::holds_alternative<SpiderAdaptiveStep>(c.step) ||
                           std::holds_alternative<SpiderTheoreticalStep>(c.step);
  if (is_spider_family(a) != spider_step)
    throw ConfigError(to_string(a) + ": step policy does not match the algorithm family");

  if (is_svrg_family(a) || is_srg_family(a)) {
    if (c.epochs < 1 || c.inner_loop < 1) throw ConfigError("epochs and inner loop must be positive");
  } else if (c.iterations < 1) {
    throw ConfigError(to_string(a) + ": iterations must be positive");
  }

  if (a != Algorithm::RSD && a != Algorithm::RSGD) {
    if (is_adaptive(a)) {
      auto* ab = std::get_if<AdaptiveBatch>(&c.batch);
      if (!ab) throw ConfigError(to_string(a) + " requires an adaptive batch schedule");
      if (!(ab->c_beta > 0.0) || ab->initial < 1)
        throw ConfigError("adaptive batch needs c_beta > 0 and B1 >= 1");
      if (ab->alpha1 && !(*ab->alpha1 > 0.0)) throw ConfigError("alpha1 must be positive");
      if (ab->setting == BatchSetting::Online && !(ab->epsilon > 0.0 && ab->alpha2_sigma2 > 0.0))
        throw ConfigError("online batch schedule needs epsilon > 0 and alpha2*sigma^2 > 0");
      ab->initial = std::min(ab->initial, n);
    } else {
      auto* fb = std::get_if<FixedBatch>(&c.batch);
      if (!fb) throw ConfigError(to_string(a) + " requires a fixed batch size");
      if (fb->size == 0) fb->size = n;
      if (fb->size > n) throw ConfigError("fixed batch size must not exceed n");
    }
  }
  return c;
}

// ---------------------------------------------------------------- shared machinery

namespace {

using Clock = std::chrono::steady_clock;

class Recorder {
 public:
  Recorder(const StochasticProblem& problem, const OptimizerConfig& config,
           const RunOptions& options)
      : problem_(problem), config_(config), options_(options) {
    label_ = options.label.empty() ? to_string(config.algorithm) : options.label;
    resumed_ = Clock::now();
  }

  // Evaluation of metrics is excluded from the wall clock.
  void record(const ManifoldPoint& x, std::size_t epoch, std::size_t step, std::uint64_t ifo,
              std::size_t batch, double step_size, double estimator_norm) {
    pause();
    const BatchEvaluation full = problem_.evaluate_full(x);
    TraceRecord rec;
    rec.algorithm = label_;
    rec.rep = options_.repetition;
    rec.epoch = epoch;
    rec.step = step;
    rec.ifo = ifo;
    if (config_.record_time) rec.wall_ms = elapsed_ms_;
    rec.cost = full.cost;
    rec.grad_norm = norm(x, full.grad);
    rec.batch_size = batch;
    rec.step_size = step_size;
    rec.estimator_norm = estimator_norm;
    check_divergence(rec.cost, rec.grad_norm, "cost or gradient");
    if (options_.optimal_cost) {
      double gap = rec.cost - *options_.optimal_cost;
      if (gap < 0.0) {
        gap = 0.0;
        ++gap_clips_;
      }
      rec.gap = gap;
    }
    if (options_.test_metric) rec.test_mse = options_.test_metric(x);
    trace_.push_back(std::move(rec));
    last_valid_ = x;
    resume();
  }

  void check_estimator(double estimator_norm) {
    if (!std::isfinite(estimator_norm)) check_divergence(estimator_norm, 0.0, "estimator");
  }

  void event(std::string what) { events_.push_back(std::move(what)); }

  // Numerical breakdown inside a step counts as divergence.
  [[noreturn]] void abort(const std::string& why) { fail(why); }

  RunResult finish(const ManifoldPoint& output, const ManifoldPoint& last,
                   std::vector<EpochLog> epochs, std::uint64_t ifo) {
    pause();
    return RunResult{output, last,     std::move(trace_), std::move(epochs),
                     ifo,    elapsed_ms_, gap_clips_,     std::move(events_)};
  }

 private:
  void pause() {
    const auto now = Clock::now();
    elapsed_ms_ += std::chrono::duration<double, std::milli>(now - resumed_).count();
    resumed_ = now;
  }
  void resume() { resumed_ = Clock::now(); }

  void check_divergence(double cost, double gn, const char* what) {
    bool bad = !std::isfinite(cost) || !std::isfinite(gn);
    if (!bad && !trace_.empty()) {
      const double f0 = trace_.front().cost;
      bad = cost - f0 > config_.divergence_factor * std::max(1.0, std::abs(f0));
    }
    if (!bad) return;
    fail(std::string(what) + " diverged");
  }

  [[noreturn]] void fail(const std::string& why) {
    const ManifoldPoint fallback = last_valid_.value_or(random_point(problem_.manifold(), dummy_));
    RunResult partial{fallback, fallback, trace_, {}, trace_.empty() ? 0 : trace_.back().ifo,
                      elapsed_ms_, gap_clips_, events_};
    throw DivergenceError(label_ + ": " + why, std::move(partial));
  }

  const StochasticProblem& problem_;
  const OptimizerConfig& config_;
  const RunOptions& options_;
  std::string label_;
  std::vector<TraceRecord> trace_;
  std::vector<std::string> events_;
  std::optional<ManifoldPoint> last_valid_;
  std::size_t gap_clips_ = 0;
  double elapsed_ms_ = 0.0;
  Clock::time_point resumed_;
  Rng dummy_{0};
};

// Reservoir choice of one iterate, uniform over everything offered.
class OutputSelector {
 public:
  OutputSelector(OutputSelection mode, std::uint64_t seed)
      : mode_(mode), rng_(seed, Stream::OutputSelection) {}

  void offer(const ManifoldPoint& x) {
    if (mode_ == OutputSelection::LastIterate) return;
    ++count_;
    if (count_ == 1 || rng_.index(count_) == 0) chosen_ = x;
  }

  ManifoldPoint result(const ManifoldPoint& last) const {
    return mode_ == OutputSelection::LastIterate || !chosen_ ? last : *chosen_;
  }

 private:
  OutputSelection mode_;
  Rng rng_;
  std::uint64_t count_ = 0;
  std::optional<ManifoldPoint> chosen_;
};

ManifoldPoint initial_point(const StochasticProblem& problem, const OptimizerConfig& c,
                            const RunOptions& o) {
  if (o.initial) {
    if (!(o.initial->descriptor() == problem.manifold()))
      throw ConfigError("initial point does not live on the problem manifold");
    return *o.initial;
  }
  Rng rng(c.seed, Stream::InitialPoint);
  return random_point(problem.manifold(), rng);
}

// Full index set when b covers n; i.i.d. draws otherwise.
std::vector<std::size_t> minibatch(const StochasticProblem& problem, std::size_t b, Rng rng) {
  if (b >= problem.size()) return problem.all_indices();
  return sample_with_replacement(problem.size(), b, rng);
}

bool over_budget(const OptimizerConfig& c, std::uint64_t ifo) {
  return c.ifo_budget && ifo >= *c.ifo_budget;
}

AdaptiveBatch effective_schedule(const StochasticProblem& problem, const OptimizerConfig& c,
                                 const ManifoldPoint& x0) {
  AdaptiveBatch s = std::get<AdaptiveBatch>(c.batch);
  if (s.alpha1) s.c_beta = *s.alpha1 * gradient_variance(problem, x0);
  return s;
}

ManifoldPoint step_along(const ManifoldPoint& x, const TangentVector& v, double eta,
                         RetractionMode mode) {
  return retract(x, -eta * TangentVector(v), mode);
}

enum class Family { Svrg, Srg };

RunResult run_double_loop(const StochasticProblem& problem, const OptimizerConfig& raw,
                          const RunOptions& options, Family family) {
  const std::size_t n = problem.size();
  const OptimizerConfig c = resolve(raw, n);
  const bool adaptive = is_adaptive(c.algorithm);
  Recorder rec(problem, c, options);
  try {
    OutputSelector selector(c.output, c.seed);

    ManifoldPoint snapshot = initial_point(problem, c, options);
    std::optional<AdaptiveBatch> schedule;
    if (adaptive) schedule = effective_schedule(problem, c, snapshot);

    std::uint64_t ifo = 0;
    std::size_t k = 0;  // global inner-step counter
    std::optional<double> beta;
    std::vector<EpochLog> epochs;
    rec.record(snapshot, 0, 0, 0, 0, 0.0, std::numeric_limits<double>::quiet_NaN());

    for (std::size_t s = 1; s <= c.epochs && !over_budget(c, ifo); ++s) {
      const std::size_t big_b =
          adaptive ? adapt_batch_size(*schedule, beta, n) : std::get<FixedBatch>(c.batch).size;
      const std::size_t m_s = adaptive ? std::min(big_b, c.inner_loop) : c.inner_loop;
      const std::size_t b_s = adaptive ? std::min(big_b, c.minibatch) : c.minibatch;

      Rng ref_rng(c.seed, Stream::ReferenceBatch, s);
      const auto ref_batch = sample_without_replacement(n, big_b, ref_rng);
      const ManifoldPoint x0 = snapshot;
      const TangentVector v0 = problem.rgrad_batch(x0, ref_batch);
      ifo += big_b;

      ManifoldPoint x = x0;
      ManifoldPoint x_prev = x0;
      TangentVector v_prev = v0;
      double beta_next = 0.0;
      std::size_t taken = 0;
      const double inv_m = 1.0 / static_cast<double>(m_s);

      for (std::size_t t = 0; t < m_s; ++t) {
        if (t > 0 && over_budget(c, ifo)) break;
        selector.offer(x);
        TangentVector v = v0;
        if (family == Family::Svrg) {
          const auto batch = minibatch(problem, b_s, Rng(c.seed, Stream::MiniBatch, s, t));
          v = svrg_estimator(problem, x, x0, v0, batch, c.transport);
          ifo += 2 * b_s;
        } else if (t > 0) {
          const auto batch = minibatch(problem, b_s, Rng(c.seed, Stream::MiniBatch, s, t));
          v = srg_estimator(problem, x, x_prev, v_prev, batch, c.transport);
          ifo += 2 * b_s;
        }
        const double eta = step_at(c.step, k, 0.0);
        const double vnorm = norm(x, v);
        rec.check_estimator(vnorm);
        ManifoldPoint next = step_along(x, v, eta, c.retraction);
        beta_next += vnorm * vnorm * inv_m;
        x_prev = x;
        v_prev = std::move(v);
        x = std::move(next);
        ++k;
        ++taken;
        const bool epoch_end = t + 1 == m_s || over_budget(c, ifo);
        if (epoch_end || (t + 1) % c.trace_interval == 0)
          rec.record(x, s, t + 1, ifo, big_b, eta, vnorm);
      }
      snapshot = x;
      beta = beta_next;
      epochs.push_back({s, big_b, taken, b_s, beta_next, ifo});
    }
    return rec.finish(selector.result(snapshot), snapshot, std::move(epochs), ifo);
  } catch (const NumericalError& e) {
    rec.abort(e.what());
  } catch (const LeastSquaresSingular& e) {
    rec.abort(e.what());
  }
}

}  // namespace

RunResult run_svrg_family(const StochasticProblem& problem, const OptimizerConfig& config,
                          const RunOptions& options) {
  if (!is_svrg_family(config.algorithm))
    throw ConfigError("run_svrg_family: algorithm must be RSVRG or RAbaSVRG");
  return run_double_loop(problem, config, options, Family::Svrg);
}

RunResult run_srg_family(const StochasticProblem& problem, const OptimizerConfig& config,
                         const RunOptions& options) {
  if (!is_srg_family(config.algorithm))
    throw ConfigError("run_srg_family: algorithm must be RSRG or RAbaSRG");
  return run_double_loop(problem, config, options, Family::Srg);
}

RunResult run_spider_family(const StochasticProblem& problem, const OptimizerConfig& raw,
                            const RunOptions& options) {
  if (!is_spider_family(raw.algorithm))
    throw ConfigError("run_spider_family: algorithm must be RSPIDER or RAbaSPIDER");
  const std::size_t n = problem.size();
  const OptimizerConfig c = resolve(raw, n);
  const bool adaptive = is_adaptive(c.algorithm);
  Recorder rec(problem, c, options);
  try {
    OutputSelector selector(c.output, c.seed);

    ManifoldPoint x = initial_point(problem, c, options);
    std::optional<AdaptiveBatch> schedule;
    if (adaptive) schedule = effective_schedule(problem, c, x);

    const std::size_t p = c.period;
    const std::size_t s2 = c.minibatch;
    std::uint64_t ifo = 0;
    std::optional<double> beta;  // β_k handed to the next refresh
    double beta_acc = 0.0;
    std::size_t s1 = 0;
    std::vector<EpochLog> epochs;
    std::optional<ManifoldPoint> x_prev;
    std::optional<TangentVector> v_prev;
    rec.record(x, 0, 0, 0, 0, 0.0, std::numeric_limits<double>::quiet_NaN());

    for (std::size_t k = 0; k < c.iterations && !over_budget(c, ifo); ++k) {
      std::optional<TangentVector> v;
      if (k % p == 0) {
        s1 = adaptive ? adapt_batch_size(*schedule, beta, n) : std::get<FixedBatch>(c.batch).size;
        Rng rng(c.seed, Stream::SpiderRefresh, k);
        v = problem.rgrad_batch(x, sample_without_replacement(n, s1, rng));
        ifo += s1;
        beta_acc = 0.0;
      } else {
        const auto batch = minibatch(problem, s2, Rng(c.seed, Stream::SpiderMiniBatch, k));
        v = srg_estimator(problem, x, *x_prev, *v_prev, batch, c.transport);
        ifo += 2 * s2;
      }
      const double vnorm = norm(x, *v);
      rec.check_estimator(vnorm);
      beta_acc += vnorm * vnorm / static_cast<double>(p);
      const double eta = step_at(c.step, k, vnorm);
      selector.offer(x);
      ManifoldPoint next = x;
      if (vnorm <= 1e-14) {
        rec.event("iteration " + std::to_string(k) + ": estimator norm below 1e-14, step skipped");
      } else {
        next = step_along(x, *v, eta / vnorm, c.retraction);
      }
      x_prev = x;
      v_prev = std::move(v);
      x = std::move(next);
      const bool period_end = (k + 1) % p == 0 || k + 1 == c.iterations || over_budget(c, ifo);
      if (period_end) {
        beta = beta_acc;
        epochs.push_back({k / p + 1, s1, k % p + 1, s2, beta_acc, ifo});
      }
      if (period_end || (k + 1) % c.trace_interval == 0)
        rec.record(x, k / p + 1, k % p + 1, ifo, s1, eta, vnorm);
    }
    return rec.finish(selector.result(x), x, std::move(epochs), ifo);
  } catch (const NumericalError& e) {
    rec.abort(e.what());
  } catch (const LeastSquaresSingular& e) {
    rec.abort(e.what());
  }
}

RunResult run_rsd(const StochasticProblem& problem, const OptimizerConfig& raw,
                  const RunOptions& options) {
  if (raw.algorithm != Algorithm::RSD) throw ConfigError("run_rsd: algorithm must be RSD");
  const std::size_t n = problem.size();
  const OptimizerConfig c = resolve(raw, n);
  Recorder rec(problem, c, options);
  try {
    OutputSelector selector(c.output, c.seed);
    ManifoldPoint x = initial_point(problem, c, options);
    std::uint64_t ifo = 0;
    rec.record(x, 0, 0, 0, 0, 0.0, std::numeric_limits<double>::quiet_NaN());

    for (std::size_t k = 0; k < c.iterations && !over_budget(c, ifo); ++k) {
      const BatchEvaluation full = problem.evaluate_full(x);
      ifo += n;
      const double gnorm = norm(x, full.grad);
      rec.check_estimator(gnorm);
      selector.offer(x);
      double eta = step_at(c.step, k, gnorm);
      std::optional<ManifoldPoint> next;
      if (!c.line_search) {
        next = step_along(x, full.grad, eta, c.retraction);
      } else {
        // Armijo: f(x₊) ≤ f(x) − 1e-4 η ‖grad f‖², halving η up to 50 times.
        for (int halvings = 0; halvings <= 50; ++halvings, eta *= 0.5) {
          ManifoldPoint trial = step_along(x, full.grad, eta, c.retraction);
          if (problem.cost_full(trial) <= full.cost - 1e-4 * eta * gnorm * gnorm) {
            next = std::move(trial);
            break;
          }
        }
        if (!next) throw LineSearchError("R-SD: Armijo backtracking failed after 50 halvings");
      }
      x = std::move(*next);
      if ((k + 1) % c.trace_interval == 0 || k + 1 == c.iterations || over_budget(c, ifo))
        rec.record(x, 0, k + 1, ifo, n, eta, gnorm);
    }
    return rec.finish(selector.result(x), x, {}, ifo);
  } catch (const NumericalError& e) {
    rec.abort(e.what());
  } catch (const LeastSquaresSingular& e) {
    rec.abort(e.what());
  }
}

RunResult run_rsgd(const StochasticProblem& problem, const OptimizerConfig& raw,
                   const RunOptions& options) {
  if (raw.algorithm != Algorithm::RSGD) throw ConfigError("run_rsgd: algorithm must be RSGD");
  const std::size_t n = problem.size();
  const OptimizerConfig c = resolve(raw, n);
  Recorder rec(problem, c, options);
  try {
    OutputSelector selector(c.output, c.seed);
    ManifoldPoint x = initial_point(problem, c, options);
    std::uint64_t ifo = 0;
    rec.record(x, 0, 0, 0, 0, 0.0, std::numeric_limits<double>::quiet_NaN());

    for (std::size_t k = 0; k < c.iterations && !over_budget(c, ifo); ++k) {
      const auto batch = minibatch(problem, c.minibatch, Rng(c.seed, Stream::SgdMiniBatch, k));
      const TangentVector g = problem.rgrad_batch(x, batch);
      ifo += c.minibatch;
      const double gnorm = norm(x, g);
      rec.check_estimator(gnorm);
      selector.offer(x);
      const double eta = step_at(c.step, k, gnorm);
      x = step_along(x, g, eta, c.retraction);
      if ((k + 1) % c.trace_interval == 0 || k + 1 == c.iterations || over_budget(c, ifo))
        rec.record(x, 0, k + 1, ifo, c.minibatch, eta, gnorm);
    }
    return rec.finish(selector.result(x), x, {}, ifo);
  } catch (const NumericalError& e) {
    rec.abort(e.what());
  } catch (const LeastSquaresSingular& e) {
    rec.abort(e.what());
  }
}

RunResult run_optimizer(const StochasticProblem& problem, const OptimizerConfig& config,
                        const RunOptions& options) {
  switch (config.algorithm) {
    case Algorithm::RSD: return run_rsd(problem, config, options);
    case Algorithm::RSGD: return run_rsgd(problem, config, options);
    case Algorithm::RSVRG:
    case Algorithm::RAbaSVRG: return run_svrg_family(problem, config, options);
    case Algorithm::RSRG:
    case Algorithm::RAbaSRG: return run_srg_family(problem, config, options);
    case Algorithm::RSPIDER:
    case Algorithm::RAbaSPIDER: return run_spider_family(problem, config, options);
  }
  throw ConfigError("unknown algorithm");
}

}  // namespace rvr
