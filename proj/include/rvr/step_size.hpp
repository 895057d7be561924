#pragma once

#include <cstddef>
#include <optional>
#include <variant>

namespace rvr {

enum class Algorithm { RSD, RSGD, RSVRG, RAbaSVRG, RSRG, RAbaSRG, RSPIDER, RAbaSPIDER };

// (L, L_l, θ, G, σ², μ, ν, τ). Only consumed by the theoretical step-size
// calculator and the restart schedules; never estimated by the library.
struct SmoothnessConstants {
  double L = 0.0;
  double L_l = 0.0;
  double theta = 0.0;
  double G = 0.0;
  double sigma2 = 0.0;
  double mu = 0.0;
  double nu = 0.0;
  double tau = 0.0;

  void validate() const;
  double transport_lipschitz() const { return L_l + theta * G; }
  double spider_theta() const;  // max{L, L_l + θG}
};

struct FixedStep {
  double eta;
};

// η_k = η / (1 + η λ k)
struct DecayingStep {
  double eta;
  double lambda;
};

// η_k = α^{⌊k/p⌋} β, used with normalized SPIDER directions.
struct SpiderAdaptiveStep {
  double alpha;
  double beta;
  std::size_t period;
};

// η_k = min{ε/(Θ n₀), ‖v_k‖/(2 Θ n₀)},  Θ = max{L, L_l + θG}.
struct SpiderTheoreticalStep {
  double epsilon;
  double n0;
  SmoothnessConstants constants;
};

using StepSizePolicy = std::variant<FixedStep, DecayingStep, SpiderAdaptiveStep, SpiderTheoreticalStep>;

void validate(const StepSizePolicy& policy);

// Step length at iteration k; estimator_norm is only read by SpiderTheoretical.
double step_at(const StepSizePolicy& policy, std::size_t k, double estimator_norm);

// Closed-form fixed step for the SVRG/SRG families. Adaptive variants use the
// (2 − 2/α) bound and require α ≥ 4; vanilla variants use the α-free bound.
// SVRG forms carry the μ²ν² m²/b factor, SRG forms m/b.
double theoretical_step_size(const SmoothnessConstants& c, std::size_t m, std::size_t b,
                             double alpha, Algorithm method);

}  // namespace rvr
