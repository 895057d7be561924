#pragma once

#include <cstddef>
#include <string>

#include "rvr/manifold.hpp"
#include "rvr/problems.hpp"

namespace rvr {

enum class OracleMethod { Eig, Richardson, GroundTruth };

std::string to_string(OracleMethod method);

struct OracleResult {
  ManifoldPoint point;
  double cost;
  OracleMethod method;
  double grad_norm;  // ‖grad f‖ at point, the stationarity certificate
  std::size_t iterations = 0;
};

// Gradient-norm bound an oracle must meet before optimality gaps are reported.
inline constexpr double kOracleCertificate = 1e-8;

inline bool certified(const OracleResult& o) { return o.grad_norm <= kOracleCertificate; }

// Top-r eigenvectors of (1/n) Σ x_i x_iᵀ. Throws DegenerateSpectrum when
// λ_r − λ_{r+1} < 1e-12.
OracleResult oracle_pca(const PcaDataset& data);

// Relaxed Richardson iteration from the arithmetic mean:
// C ← C^{1/2} expm(θ_R S) C^{1/2}, S = (1/n) Σ logm(C^{-1/2} X_i C^{-1/2}),
// until ‖S‖_F = ‖(1/n) Σ Log_C(X_i)‖_C ≤ tol. Throws ConvergenceError.
OracleResult oracle_rkm(const SpdDataset& data, double tol = 1e-10, std::size_t max_iter = 1000,
                        double relaxation = 1.0);

// Generator ground truth. Throws ConfigError when the dataset carries none.
OracleResult oracle_lrmc(const std::shared_ptr<const LrmcDataset>& data);

}  // namespace rvr
