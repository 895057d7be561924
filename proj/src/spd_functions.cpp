#include "rvr/spd_functions.hpp"

#include <algorithm>
#include <cmath>

#include "rvr/errors.hpp"

namespace rvr::spd {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) {
  return 0.5 * (a + a.transpose());
}

SymmetricEigen eigh(const Eigen::MatrixXd& a) {
  if (!a.allFinite()) throw NumericalError("eigh: non-finite input");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetrize(a));
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigh: eigendecomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::VectorXd clamped_values(const SymmetricEigen& e) {
  const double top = e.values.maxCoeff();
  if (!(top > 0.0)) throw NumericalError("matrix is not positive definite");
  const double floor = kSpectralFloor * top;
  return e.values.cwiseMax(floor);
}

namespace {

template <class F>
Eigen::MatrixXd positive_function(const Eigen::MatrixXd& a, F&& f) {
  SymmetricEigen e = eigh(a);
  e.values = clamped_values(e);
  return apply(e, std::forward<F>(f));
}

}  // namespace

Eigen::MatrixXd sqrtm(const Eigen::MatrixXd& a) {
  return positive_function(a, [](double v) { return std::sqrt(v); });
}

Eigen::MatrixXd inv_sqrtm(const Eigen::MatrixXd& a) {
  return positive_function(a, [](double v) { return 1.0 / std::sqrt(v); });
}

Eigen::MatrixXd logm(const Eigen::MatrixXd& a) {
  return positive_function(a, [](double v) { return std::log(v); });
}

Eigen::MatrixXd inverse(const Eigen::MatrixXd& a) {
  return positive_function(a, [](double v) { return 1.0 / v; });
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  return apply(eigh(a), [](double v) { return std::exp(v); });
}

bool is_symmetric(const Eigen::MatrixXd& a, double tol) {
  return a.rows() == a.cols() && (a - a.transpose()).norm() <= tol;
}

bool is_positive_definite(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || !a.allFinite()) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(symmetrize(a));
  return llt.info() == Eigen::Success;
}

}  // namespace rvr::spd
