#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rvr/problem.hpp"
#include "rvr/rng.hpp"

namespace rvr {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct PcaDataset {
  RowMatrix samples;  // n × d, one sample per row
  Eigen::Index r = 1;

  std::size_t n() const { return static_cast<std::size_t>(samples.rows()); }
  Eigen::Index d() const { return samples.cols(); }
  void validate() const;
};

struct MatrixEntry {
  std::size_t row;
  std::size_t col;
  double value;
};

// Observed entries of a d × n matrix, stored column by column.
struct LrmcDataset {
  Eigen::Index d = 0;
  std::size_t n = 0;
  Eigen::Index r = 1;
  std::vector<std::size_t> col_start;  // n + 1 offsets into rows/values
  std::vector<Eigen::Index> rows;
  std::vector<double> values;
  std::vector<MatrixEntry> test;
  std::optional<Eigen::MatrixXd> truth_basis;   // d × r orthonormal
  std::optional<Eigen::MatrixXd> truth_coeffs;  // r × n, A ≈ basis · coeffs

  std::size_t observed() const { return values.size(); }
  std::size_t column_count(std::size_t i) const { return col_start[i + 1] - col_start[i]; }
  void validate() const;

  // Builds the column-compressed layout from unordered training triples.
  static LrmcDataset from_entries(Eigen::Index d, std::size_t n, Eigen::Index r,
                                  std::vector<MatrixEntry> train, std::vector<MatrixEntry> test);
};

struct SpdDataset {
  std::vector<Eigen::MatrixXd> matrices;

  std::size_t n() const { return matrices.size(); }
  Eigen::Index d() const { return matrices.empty() ? 0 : matrices.front().rows(); }
  void validate() const;
};

// f_i(U) = −x_iᵀ U Uᵀ x_i on Grassmann(r, d).
class PcaProblem final : public StochasticProblem {
 public:
  explicit PcaProblem(std::shared_ptr<const PcaDataset> data);

  const ManifoldDescriptor& manifold() const override { return desc_; }
  std::size_t size() const override { return data_->n(); }
  std::string name() const override { return "pca"; }
  std::unique_ptr<ComponentEvaluator> bind(const ManifoldPoint& x) const override;

  const PcaDataset& data() const { return *data_; }

 private:
  std::shared_ptr<const PcaDataset> data_;
  ManifoldDescriptor desc_;
};

// f_i(U) = min_v ‖P_{Ω_i}(a_i − U v)‖²; gradient by the envelope rule.
class LrmcProblem final : public StochasticProblem {
 public:
  explicit LrmcProblem(std::shared_ptr<const LrmcDataset> data);

  const ManifoldDescriptor& manifold() const override { return desc_; }
  std::size_t size() const override { return data_->n; }
  std::string name() const override { return "lrmc"; }
  std::unique_ptr<ComponentEvaluator> bind(const ManifoldPoint& x) const override;

  const LrmcDataset& data() const { return *data_; }

 private:
  std::shared_ptr<const LrmcDataset> data_;
  ManifoldDescriptor desc_;
};

// f_i(C) = ‖logm(C^{-1/2} X_i C^{-1/2})‖_F² under the affine-invariant metric.
class RkmProblem final : public StochasticProblem {
 public:
  explicit RkmProblem(std::shared_ptr<const SpdDataset> data);

  const ManifoldDescriptor& manifold() const override { return desc_; }
  std::size_t size() const override { return data_->n(); }
  std::string name() const override { return "rkm"; }
  std::unique_ptr<ComponentEvaluator> bind(const ManifoldPoint& x) const override;
  // Affine invariance: f(X^{1/2} Z X^{1/2}) is evaluated as the cost of Z
  // against the data whitened by X, in extended precision.
  double pullback_cost(const ManifoldPoint& x, const TangentVector& xi,
                       RetractionMode mode) const override;

  const SpdDataset& data() const { return *data_; }

 private:
  std::shared_ptr<const SpdDataset> data_;
  ManifoldDescriptor desc_;
};

std::unique_ptr<StochasticProblem> pca_problem(std::shared_ptr<const PcaDataset> data);
std::unique_ptr<StochasticProblem> lrmc_problem(std::shared_ptr<const LrmcDataset> data);
std::unique_ptr<StochasticProblem> rkm_problem(std::shared_ptr<const SpdDataset> data);

// Scale applied to the r significant columns of the synthetic PCA data.
inline constexpr double kPcaSignificantScale = 10.0;

PcaDataset gen_pca(std::size_t n, Eigen::Index d, Eigen::Index r, Rng& rng);

struct LrmcOptions {
  std::size_t n = 20000;
  Eigen::Index d = 100;
  Eigen::Index r = 5;
  double cn = 50.0;
  double os = 8.0;
  double eps = 1e-10;
  // Held-out entries as a fraction of the observed count.
  double test_fraction = 0.1;
};

LrmcDataset gen_lrmc(const LrmcOptions& opts, Rng& rng);

SpdDataset gen_spd(std::size_t n, Eigen::Index d, double cn, Rng& rng);

// Per-column least-squares coefficients of the observed entries on span(U).
// Throws LeastSquaresSingular when a column's observed block is rank deficient.
Eigen::VectorXd lrmc_column_fit(const LrmcDataset& data, const Eigen::MatrixXd& basis,
                                std::size_t column);

double test_mse(const LrmcDataset& data, const ManifoldPoint& u);

}  // namespace rvr
