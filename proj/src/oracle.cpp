#include "rvr/oracle.hpp"

#include <cmath>

#include "rvr/errors.hpp"
#include "rvr/spd_functions.hpp"

namespace rvr {

std::string to_string(OracleMethod m) {
  switch (m) {
    case OracleMethod::Eig: return "Eig";
    case OracleMethod::Richardson: return "Richardson";
    case OracleMethod::GroundTruth: return "GroundTruth";
  }
  return "?";
}

OracleResult oracle_pca(const PcaDataset& data) {
  data.validate();
  const Eigen::Index d = data.d();
  const Eigen::Index r = data.r;
  const Eigen::MatrixXd cov =
      spd::symmetrize(data.samples.transpose() * data.samples / static_cast<double>(data.n()));
  const spd::SymmetricEigen e = spd::eigh(cov);  // ascending
  if (r < d) {
    const double gap = e.values(d - r) - e.values(d - r - 1);
    if (gap < 1e-12)
      throw DegenerateSpectrum("PCA oracle: eigen-gap " + std::to_string(gap) +
                               " too small for a unique subspace");
  }
  const Eigen::MatrixXd u = e.vectors.rightCols(r).rowwise().reverse();
  const ManifoldPoint point(ManifoldDescriptor::grassmann(r, d), qf(u));
  const Eigen::MatrixXd& q = point.data();
  // Full Euclidean gradient is −2·cov·U.
  const TangentVector grad = egrad_to_rgrad(point, -2.0 * cov * q);
  return OracleResult{point, -e.values.tail(r).sum(), OracleMethod::Eig, norm(point, grad), 0};
}

OracleResult oracle_rkm(const SpdDataset& data, double tol, std::size_t max_iter,
                        double relaxation) {
  data.validate();
  if (data.n() == 0) throw ConfigError("Karcher mean of an empty sample");
  if (!(relaxation > 0.0 && relaxation <= 1.0))
    throw ConfigError("Richardson relaxation must lie in (0, 1]");
  if (!(tol > 0.0)) throw ConfigError("Richardson tolerance must be positive");
  const auto n = static_cast<double>(data.n());
  const ManifoldDescriptor desc = ManifoldDescriptor::spd(data.d());

  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(data.d(), data.d());
  for (const auto& x : data.matrices) c += x;
  c = spd::symmetrize(c / n);

  double residual = 0.0;
  for (std::size_t it = 0;; ++it) {
    const ManifoldPoint point(desc, c);
    const SpdFactors& f = point.spd();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(data.d(), data.d());
    double cost = 0.0;
    for (const auto& x : data.matrices) {
      const Eigen::MatrixXd l = spd::logm(spd::symmetrize(f.inv_sqrt * x * f.inv_sqrt));
      s += l;
      cost += l.squaredNorm();
    }
    s /= n;
    residual = s.norm();
    if (residual <= tol) {
      // grad f = −2 (1/n) Σ Log_C(X_i), so ‖grad f‖_C = 2‖S‖_F.
      return OracleResult{point, cost / n, OracleMethod::Richardson, 2.0 * residual, it};
    }
    if (it >= max_iter) break;
    c = spd::symmetrize(f.sqrt * spd::expm(relaxation * s) * f.sqrt);
  }
  throw ConvergenceError("Richardson iteration did not reach tolerance", residual);
}

OracleResult oracle_lrmc(const std::shared_ptr<const LrmcDataset>& data) {
  if (!data || !data->truth_basis) throw ConfigError("LRMC dataset carries no ground truth");
  const ManifoldPoint point(ManifoldDescriptor::grassmann(data->r, data->d),
                            qf(*data->truth_basis));
  const auto problem = lrmc_problem(data);
  const BatchEvaluation full = problem->evaluate_full(point);
  return OracleResult{point, full.cost, OracleMethod::GroundTruth, norm(point, full.grad), 0};
}

}  // namespace rvr
