#include "rvr/step_size.hpp"

#include <algorithm>
#include <cmath>

#include "rvr/errors.hpp"

namespace rvr {

void SmoothnessConstants::validate() const {
  for (double v : {L, L_l, theta, G, sigma2, mu, nu, tau})
    if (!std::isfinite(v) || v < 0.0)
      throw ConfigError("smoothness constants must be finite and nonnegative");
}

double SmoothnessConstants::spider_theta() const { return std::max(L, transport_lipschitz()); }

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void validate(const StepSizePolicy& policy) {
  std::visit(overloaded{
                 [](const FixedStep& s) {
                   if (!(s.eta > 0.0)) throw ConfigError("step size eta must be positive");
                 },
                 [](const DecayingStep& s) {
                   if (!(s.eta > 0.0) || !(s.lambda >= 0.0))
                     throw ConfigError("decaying step needs eta > 0 and lambda >= 0");
                 },
                 [](const SpiderAdaptiveStep& s) {
                   if (!(s.alpha > 0.0 && s.alpha <= 1.0) || !(s.beta > 0.0) || s.period < 1)
                     throw ConfigError("adaptive SPIDER step needs 0 < alpha <= 1, beta > 0, p >= 1");
                 },
                 [](const SpiderTheoreticalStep& s) {
                   s.constants.validate();
                   if (!(s.epsilon > 0.0) || !(s.n0 >= 1.0) || !(s.constants.spider_theta() > 0.0))
                     throw ConfigError("theoretical SPIDER step needs eps > 0, n0 >= 1, Theta > 0");
                 },
             },
             policy);
}

double step_at(const StepSizePolicy& policy, std::size_t k, double estimator_norm) {
  return std::visit(
      overloaded{
          [](const FixedStep& s) { return s.eta; },
          [k](const DecayingStep& s) {
            return s.eta / (1.0 + s.eta * s.lambda * static_cast<double>(k));
          },
          [k](const SpiderAdaptiveStep& s) {
            return std::pow(s.alpha, static_cast<double>(k / s.period)) * s.beta;
          },
          [estimator_norm](const SpiderTheoreticalStep& s) {
            const double scale = s.constants.spider_theta() * s.n0;
            return std::min(s.epsilon / scale, estimator_norm / (2.0 * scale));
          },
      },
      policy);
}

double theoretical_step_size(const SmoothnessConstants& c, std::size_t m, std::size_t b,
                             double alpha, Algorithm method) {
  c.validate();
  if (!(c.L > 0.0) || !(c.L_l > 0.0)) throw ConfigError("theoretical step needs L, L_l > 0");
  if (m < 1 || b < 1) throw ConfigError("theoretical step needs m, b >= 1");
  const double lt = c.transport_lipschitz();
  const double md = static_cast<double>(m);
  const double bd = static_cast<double>(b);
  double ratio = 0.0;
  bool adaptive = false;
  switch (method) {
    case Algorithm::RAbaSVRG:
      adaptive = true;
      [[fallthrough]];
    case Algorithm::RSVRG:
      ratio = lt * lt * c.mu * c.mu * c.nu * c.nu * md * md / bd;
      break;
    case Algorithm::RAbaSRG:
      adaptive = true;
      [[fallthrough]];
    case Algorithm::RSRG:
      ratio = lt * lt * md / bd;
      break;
    default:
      throw ConfigError("theoretical step size is defined for the SVRG and SRG families only");
  }
  if (!adaptive) return 2.0 / (c.L + std::sqrt(c.L * c.L + 4.0 * ratio));
  if (!(alpha >= 4.0)) throw ConfigError("adaptive step-size bound requires alpha >= 4");
  const double shrink = 1.0 - 1.0 / alpha;
  return 2.0 * shrink / (c.L + std::sqrt(c.L * c.L + 4.0 * shrink * ratio));
}

}  // namespace rvr
