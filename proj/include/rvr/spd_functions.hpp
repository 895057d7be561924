#pragma once

#include <Eigen/Dense>

// Spectral functions of symmetric matrices. All of them go through one
// symmetric eigendecomposition, so outputs are exactly symmetric. Eigenvalues
// are clamped below at kSpectralFloor * max eigenvalue before sqrt/log/inverse.
namespace rvr::spd {

inline constexpr double kSpectralFloor = 1e-14;

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a);

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns
};

SymmetricEigen eigh(const Eigen::MatrixXd& a);

// V f(Λ) Vᵀ for the given eigendecomposition.
template <class F>
Eigen::MatrixXd apply(const SymmetricEigen& e, F&& f) {
  Eigen::VectorXd fv(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) fv(i) = f(e.values(i));
  Eigen::MatrixXd out = e.vectors * fv.asDiagonal() * e.vectors.transpose();
  return symmetrize(out);
}

Eigen::MatrixXd sqrtm(const Eigen::MatrixXd& a);
Eigen::MatrixXd inv_sqrtm(const Eigen::MatrixXd& a);
Eigen::MatrixXd logm(const Eigen::MatrixXd& a);
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);
Eigen::MatrixXd inverse(const Eigen::MatrixXd& a);

// Clamped positive spectrum (used by the matrix functions above).
Eigen::VectorXd clamped_values(const SymmetricEigen& e);

bool is_symmetric(const Eigen::MatrixXd& a, double tol);
bool is_positive_definite(const Eigen::MatrixXd& a);

}  // namespace rvr::spd
