#include "rvr/problems.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "rvr/errors.hpp"
#include "rvr/sampling.hpp"
#include "rvr/spd_functions.hpp"

namespace rvr {

// ---------------------------------------------------------------- datasets

void PcaDataset::validate() const {
  if (samples.rows() < 1) throw ShapeError("PCA dataset needs at least one sample");
  if (r < 1 || r > samples.cols()) throw ShapeError("PCA rank must satisfy 1 <= r <= d");
  if (!samples.allFinite()) throw NumericalError("PCA dataset has non-finite entries");
}

LrmcDataset LrmcDataset::from_entries(Eigen::Index d, std::size_t n, Eigen::Index r,
                                      std::vector<MatrixEntry> train,
                                      std::vector<MatrixEntry> test) {
  LrmcDataset out;
  out.d = d;
  out.n = n;
  out.r = r;
  std::sort(train.begin(), train.end(), [](const MatrixEntry& a, const MatrixEntry& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  out.col_start.assign(n + 1, 0);
  out.rows.reserve(train.size());
  out.values.reserve(train.size());
  for (const auto& e : train) {
    if (e.col >= n || e.row >= static_cast<std::size_t>(d))
      throw ShapeError("LRMC entry outside the d x n matrix");
    ++out.col_start[e.col + 1];
    out.rows.push_back(static_cast<Eigen::Index>(e.row));
    out.values.push_back(e.value);
  }
  for (std::size_t i = 0; i < n; ++i) out.col_start[i + 1] += out.col_start[i];
  out.test = std::move(test);
  return out;
}

void LrmcDataset::validate() const {
  if (r < 1 || r > d) throw ShapeError("LRMC rank must satisfy 1 <= r <= d");
  if (n < 1) throw ShapeError("LRMC dataset needs at least one column");
  if (col_start.size() != n + 1 || rows.size() != values.size() || col_start.back() != rows.size())
    throw ShapeError("LRMC column layout is inconsistent");
  for (std::size_t i = 0; i < n; ++i)
    if (column_count(i) < static_cast<std::size_t>(r))
      throw ConfigError("LRMC column " + std::to_string(i) + " has fewer than r observed entries");
  for (double v : values)
    if (!std::isfinite(v)) throw NumericalError("LRMC dataset has non-finite entries");
  // Held-out entries must not coincide with training entries.
  for (const auto& e : test) {
    if (e.col >= n || e.row >= static_cast<std::size_t>(d))
      throw ShapeError("LRMC test entry outside the d x n matrix");
    const auto begin = rows.begin() + static_cast<std::ptrdiff_t>(col_start[e.col]);
    const auto end = rows.begin() + static_cast<std::ptrdiff_t>(col_start[e.col + 1]);
    if (std::binary_search(begin, end, static_cast<Eigen::Index>(e.row)))
      throw ConfigError("LRMC test entry overlaps the training set");
  }
}

void SpdDataset::validate() const {
  if (matrices.empty()) throw ShapeError("SPD dataset needs at least one matrix");
  const Eigen::Index dim = d();
  for (const auto& m : matrices) {
    if (m.rows() != dim || m.cols() != dim) throw ShapeError("SPD dataset matrices differ in size");
    if (!spd::is_symmetric(m, 1e-12 * std::max(1.0, m.norm())) || !spd::is_positive_definite(m))
      throw NumericalError("SPD dataset contains a matrix that is not SPD");
  }
}

// ---------------------------------------------------------------- PCA

namespace {

class PcaEvaluator final : public ComponentEvaluator {
 public:
  PcaEvaluator(const PcaDataset& data, ManifoldPoint x) : data_(data), x_(std::move(x)) {}

  void accumulate(std::size_t i, double* cost, Eigen::MatrixXd* grad) const override {
    const auto xi = data_.samples.row(static_cast<Eigen::Index>(i));
    const Eigen::RowVectorXd proj = xi * x_.data();  // x_iᵀ U
    if (cost) *cost -= proj.squaredNorm();
    if (grad) grad->noalias() -= 2.0 * xi.transpose() * proj;
  }

  TangentVector finish(const Eigen::MatrixXd& raw) const override {
    return egrad_to_rgrad(x_, raw);
  }

 private:
  const PcaDataset& data_;
  ManifoldPoint x_;
};

void require_point(const StochasticProblem& p, const ManifoldPoint& x) {
  if (!(x.descriptor() == p.manifold()))
    throw ShapeError(p.name() + ": point does not live on the problem manifold");
}

}  // namespace

PcaProblem::PcaProblem(std::shared_ptr<const PcaDataset> data) : data_(std::move(data)) {
  data_->validate();
  desc_ = ManifoldDescriptor::grassmann(data_->r, data_->d());
}

std::unique_ptr<ComponentEvaluator> PcaProblem::bind(const ManifoldPoint& x) const {
  require_point(*this, x);
  return std::make_unique<PcaEvaluator>(*data_, x);
}

// ---------------------------------------------------------------- LRMC

Eigen::VectorXd lrmc_column_fit(const LrmcDataset& data, const Eigen::MatrixXd& basis,
                                std::size_t column) {
  const std::size_t begin = data.col_start[column];
  const auto k = static_cast<Eigen::Index>(data.column_count(column));
  Eigen::MatrixXd block(k, basis.cols());
  Eigen::VectorXd rhs(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    block.row(j) = basis.row(data.rows[begin + static_cast<std::size_t>(j)]);
    rhs(j) = data.values[begin + static_cast<std::size_t>(j)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(block);
  if (qr.rank() < basis.cols())
    throw LeastSquaresSingular("LRMC column " + std::to_string(column) +
                               ": observed block is rank deficient");
  return qr.solve(rhs);
}

namespace {

class LrmcEvaluator final : public ComponentEvaluator {
 public:
  LrmcEvaluator(const LrmcDataset& data, ManifoldPoint x) : data_(data), x_(std::move(x)) {}

  void accumulate(std::size_t i, double* cost, Eigen::MatrixXd* grad) const override {
    const Eigen::MatrixXd& u = x_.data();
    const Eigen::VectorXd v = lrmc_column_fit(data_, u, i);
    const std::size_t begin = data_.col_start[i];
    const std::size_t k = data_.column_count(i);
    for (std::size_t j = 0; j < k; ++j) {
      const Eigen::Index row = data_.rows[begin + j];
      const double res = data_.values[begin + j] - u.row(row).dot(v);
      if (cost) *cost += res * res;
      if (grad) grad->row(row).noalias() -= 2.0 * res * v.transpose();
    }
  }

  TangentVector finish(const Eigen::MatrixXd& raw) const override {
    return egrad_to_rgrad(x_, raw);
  }

 private:
  const LrmcDataset& data_;
  ManifoldPoint x_;
};

}  // namespace

LrmcProblem::LrmcProblem(std::shared_ptr<const LrmcDataset> data) : data_(std::move(data)) {
  data_->validate();
  desc_ = ManifoldDescriptor::grassmann(data_->r, data_->d);
}

std::unique_ptr<ComponentEvaluator> LrmcProblem::bind(const ManifoldPoint& x) const {
  require_point(*this, x);
  return std::make_unique<LrmcEvaluator>(*data_, x);
}

double test_mse(const LrmcDataset& data, const ManifoldPoint& u) {
  if (data.test.empty()) throw ConfigError("test_mse: empty test set");
  if (!(u.descriptor() == ManifoldDescriptor::grassmann(data.r, data.d)))
    throw ShapeError("test_mse: point is not on Grassmann(r, d)");
  std::unordered_map<std::size_t, Eigen::VectorXd> fits;
  double total = 0.0;
  for (const auto& e : data.test) {
    auto it = fits.find(e.col);
    if (it == fits.end()) it = fits.emplace(e.col, lrmc_column_fit(data, u.data(), e.col)).first;
    const double err = u.data().row(static_cast<Eigen::Index>(e.row)).dot(it->second) - e.value;
    total += err * err;
  }
  return total / static_cast<double>(data.test.size());
}

// ---------------------------------------------------------------- RKM

namespace {

class RkmEvaluator final : public ComponentEvaluator {
 public:
  RkmEvaluator(const SpdDataset& data, ManifoldPoint x) : data_(data), x_(std::move(x)) {}

  void accumulate(std::size_t i, double* cost, Eigen::MatrixXd* grad) const override {
    const Eigen::MatrixXd& w = x_.spd().inv_sqrt;
    const spd::SymmetricEigen e = spd::eigh(w * data_.matrices[i] * w);
    const Eigen::VectorXd logs = spd::clamped_values(e).array().log();
    if (cost) *cost += logs.squaredNorm();
    if (grad) grad->noalias() += e.vectors * logs.asDiagonal() * e.vectors.transpose();
  }

  // raw = mean of logm(C^{-1/2} X_i C^{-1/2});  grad = −2 C^{1/2} raw C^{1/2}.
  TangentVector finish(const Eigen::MatrixXd& raw) const override {
    const Eigen::MatrixXd& s = x_.spd().sqrt;
    return TangentVector(x_, spd::symmetrize(-2.0 * s * raw * s));
  }

 private:
  const SpdDataset& data_;
  ManifoldPoint x_;
};

}  // namespace

RkmProblem::RkmProblem(std::shared_ptr<const SpdDataset> data) : data_(std::move(data)) {
  data_->validate();
  desc_ = ManifoldDescriptor::spd(data_->d());
}

std::unique_ptr<ComponentEvaluator> RkmProblem::bind(const ManifoldPoint& x) const {
  require_point(*this, x);
  return std::make_unique<RkmEvaluator>(*data_, x);
}

double RkmProblem::pullback_cost(const ManifoldPoint& x, const TangentVector& xi,
                                 RetractionMode mode) const {
  require_point(*this, x);
  // Extended precision: at ill-conditioned X the whitened data spans many
  // orders of magnitude and double eigenvalues carry eps·‖W‖ absolute error.
  using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::MatrixXd& w_d = x.spd().inv_sqrt;
  const LMatrix w = w_d.cast<long double>();
  const Eigen::Index d = w.rows();
  const LMatrix xi_l = xi.data().cast<long double>();
  LMatrix a = w * xi_l * w;
  a = (0.5L * (a + a.transpose())).eval();
  LMatrix z;
  if (mode == RetractionMode::FirstOrder) {
    z = LMatrix::Identity(d, d) + a + 0.5L * a * a;
  } else {
    Eigen::SelfAdjointEigenSolver<LMatrix> ea(a);
    z = ea.eigenvectors() * ea.eigenvalues().array().exp().matrix().asDiagonal() *
        ea.eigenvectors().transpose();
  }
  Eigen::SelfAdjointEigenSolver<LMatrix> ez((0.5L * (z + z.transpose())).eval());
  const LMatrix zw = ez.eigenvectors() * ez.eigenvalues().array().rsqrt().matrix().asDiagonal() *
                     ez.eigenvectors().transpose();
  const LMatrix t = zw * w;
  long double total = 0.0L;
  for (const Eigen::MatrixXd& m : data_->matrices) {
    LMatrix c = t * m.cast<long double>() * t.transpose();
    c = (0.5L * (c + c.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<LMatrix> e(c, Eigen::EigenvaluesOnly);
    for (Eigen::Index k = 0; k < d; ++k) {
      const long double l = std::log(std::max(e.eigenvalues()(k), 1e-300L));
      total += l * l;
    }
  }
  return static_cast<double>(total / static_cast<long double>(data_->n()));
}

std::unique_ptr<StochasticProblem> pca_problem(std::shared_ptr<const PcaDataset> data) {
  return std::make_unique<PcaProblem>(std::move(data));
}
std::unique_ptr<StochasticProblem> lrmc_problem(std::shared_ptr<const LrmcDataset> data) {
  return std::make_unique<LrmcProblem>(std::move(data));
}
std::unique_ptr<StochasticProblem> rkm_problem(std::shared_ptr<const SpdDataset> data) {
  return std::make_unique<RkmProblem>(std::move(data));
}

// ---------------------------------------------------------------- generators

PcaDataset gen_pca(std::size_t n, Eigen::Index d, Eigen::Index r, Rng& rng) {
  if (r < 1 || r > d) throw ShapeError("gen_pca: r must satisfy 1 <= r <= d");
  if (n < 1) throw ShapeError("gen_pca: n must be positive");
  RowMatrix z(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = rng.normal();
  z.leftCols(r) *= kPcaSignificantScale;
  const Eigen::MatrixXd rotation = qf(rng.normal_matrix(d, d));
  PcaDataset out;
  out.samples = z * rotation.transpose();
  out.r = r;
  return out;
}

LrmcDataset gen_lrmc(const LrmcOptions& o, Rng& rng) {
  if (o.r < 1 || o.r > o.d) throw ShapeError("gen_lrmc: r must satisfy 1 <= r <= d");
  if (o.n < static_cast<std::size_t>(o.r)) throw ShapeError("gen_lrmc: n must be at least r");
  if (o.cn < 1.0) throw ConfigError("gen_lrmc: condition number must be >= 1");
  if (o.os <= 0.0 || o.eps < 0.0 || o.test_fraction < 0.0)
    throw ConfigError("gen_lrmc: os must be positive, eps and test_fraction nonnegative");
  const std::size_t total = static_cast<std::size_t>(o.d) * o.n;
  const double dof = static_cast<double>(o.n + static_cast<std::size_t>(o.d) -
                                         static_cast<std::size_t>(o.r)) *
                     static_cast<double>(o.r);
  const auto observed = static_cast<std::size_t>(std::llround(o.os * dof));
  if (observed > total)
    throw ConfigError("gen_lrmc: os*(n+d-r)*r = " + std::to_string(observed) +
                      " exceeds d*n = " + std::to_string(total));
  const std::size_t held_out = std::min(
      static_cast<std::size_t>(o.test_fraction * static_cast<double>(observed)), total - observed);

  // Ground truth U diag(σ) Vᵀ, σ geometric from σ_max down to σ_max/cn, scaled
  // so that the mean squared entry of A is one.
  const Eigen::MatrixXd basis = qf(rng.normal_matrix(o.d, o.r));
  const Eigen::MatrixXd right = qf(rng.normal_matrix(static_cast<Eigen::Index>(o.n), o.r));
  Eigen::VectorXd sigma(o.r);
  for (Eigen::Index k = 0; k < o.r; ++k)
    sigma(k) = o.r == 1 ? 1.0 : std::pow(o.cn, -static_cast<double>(k) / static_cast<double>(o.r - 1));
  sigma *= std::sqrt(static_cast<double>(total)) / sigma.norm();
  Eigen::MatrixXd coeffs = sigma.asDiagonal() * right.transpose();

  const auto picks = draw_distinct(total, observed + held_out, rng);
  std::vector<MatrixEntry> train;
  std::vector<MatrixEntry> test;
  train.reserve(observed);
  test.reserve(held_out);
  for (std::size_t k = 0; k < picks.size(); ++k) {
    const std::size_t row = picks[k] % static_cast<std::size_t>(o.d);
    const std::size_t col = picks[k] / static_cast<std::size_t>(o.d);
    const double value = basis.row(static_cast<Eigen::Index>(row))
                             .dot(coeffs.col(static_cast<Eigen::Index>(col))) +
                         o.eps * rng.normal();
    (k < observed ? train : test).push_back({row, col, value});
  }
  LrmcDataset out = LrmcDataset::from_entries(o.d, o.n, o.r, std::move(train), std::move(test));
  out.truth_basis = basis;
  out.truth_coeffs = std::move(coeffs);
  out.validate();
  return out;
}

SpdDataset gen_spd(std::size_t n, Eigen::Index d, double cn, Rng& rng) {
  if (cn < 1.0) throw ConfigError("gen_spd: condition number must be >= 1");
  if (n < 1 || d < 1) throw ShapeError("gen_spd: n and d must be positive");
  SpdDataset out;
  out.matrices.reserve(n);
  const double log_cn = std::log(cn);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::MatrixXd q = qf(rng.normal_matrix(d, d));
    Eigen::VectorXd lambda(d);
    for (Eigen::Index j = 0; j < d; ++j) lambda(j) = std::exp(-log_cn * rng.uniform());
    out.matrices.push_back(spd::symmetrize(q * lambda.asDiagonal() * q.transpose()));
  }
  return out;
}

}  // namespace rvr
