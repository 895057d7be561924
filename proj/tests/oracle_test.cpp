#include <cmath>

#include <gtest/gtest.h>

#include "rvr/errors.hpp"
#include "rvr/oracle.hpp"
#include "rvr/problems.hpp"
#include "rvr/spd_functions.hpp"
#include "support.hpp"

using namespace rvr;

TEST(OraclePca, DiagonalCovariance) {
  // Rows ±√(3n/2)e1 etc. give covariance diag(3, 2, 1).
  PcaDataset d;
  d.r = 2;
  d.samples = Eigen::MatrixXd::Zero(6, 3);
  const double s[3] = {std::sqrt(3.0 * 3), std::sqrt(2.0 * 3), std::sqrt(1.0 * 3)};
  for (int j = 0; j < 3; ++j) {
    d.samples(2 * j, j) = s[j];
    d.samples(2 * j + 1, j) = -s[j];
  }
  const OracleResult o = oracle_pca(d);
  EXPECT_NEAR(o.cost, -5.0, 1e-12);
  EXPECT_EQ(o.method, OracleMethod::Eig);
  const Eigen::MatrixXd u = o.point.data();
  EXPECT_NEAR(u.row(2).norm(), 0.0, 1e-12);
  EXPECT_TRUE(certified(o));
}

TEST(OraclePca, StationaryAndBetterThanRandomPoints) {
  auto data = fixtures::pca_data(1000, 8, 2, 1);
  auto p = pca_problem(data);
  const OracleResult o = oracle_pca(*data);
  EXPECT_LE(norm(o.point, p->rgrad_full(o.point)), 1e-8);
  EXPECT_NEAR(o.cost, p->cost_full(o.point), 1e-10 * std::abs(o.cost));
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) ASSERT_LE(o.cost, p->cost_full(random_point(p->manifold(), rng)));
}

TEST(OraclePca, DegenerateSpectrumRaises) {
  PcaDataset d;
  d.r = 1;
  d.samples = Eigen::MatrixXd::Identity(4, 4);
  EXPECT_THROW(oracle_pca(d), DegenerateSpectrum);
}

TEST(OracleRkm, SingleSampleIsItsOwnMean) {
  auto data = fixtures::spd_data(1, 4, 10.0, 3);
  const OracleResult o = oracle_rkm(*data);
  EXPECT_LT((o.point.data() - data->matrices[0]).norm(), 1e-10 * data->matrices[0].norm());
  EXPECT_LE(o.iterations, 1u);
}

TEST(OracleRkm, TwoSamplesGiveGeodesicMidpoint) {
  auto data = fixtures::spd_data(2, 4, 20.0, 4);
  const Eigen::MatrixXd s = spd::sqrtm(data->matrices[0]);
  const Eigen::MatrixXd is = spd::inv_sqrtm(data->matrices[0]);
  const ManifoldPoint mid(
      ManifoldDescriptor::spd(4),
      spd::symmetrize(s * spd::sqrtm(spd::symmetrize(is * data->matrices[1] * is)) * s));
  EXPECT_LE(distance(oracle_rkm(*data).point, mid), 1e-9);
}

TEST(OracleRkm, CommutingFamilyGivesGeometricMeans) {
  SpdDataset d;
  const Eigen::Vector3d a(1, 4, 9), b(4, 1, 0.5), c(2, 2, 2);
  for (const Eigen::Vector3d& v : {a, b, c}) d.matrices.push_back(v.asDiagonal());
  const Eigen::Vector3d g = (a.array().log() + b.array().log() + c.array().log()).exp().pow(1.0 / 3);
  const OracleResult o = oracle_rkm(d);
  EXPECT_LT((o.point.data() - Eigen::MatrixXd(g.asDiagonal())).norm(), 1e-10);
  EXPECT_EQ(o.method, OracleMethod::Richardson);
}

TEST(OracleRkm, SatisfiesFirstOrderCondition) {
  auto data = fixtures::spd_data(200, 5, 20.0, 5);
  auto p = rkm_problem(data);
  const OracleResult o = oracle_rkm(*data);
  EXPECT_LE(0.5 * norm(o.point, p->rgrad_full(o.point)), 1e-10);
  EXPECT_TRUE(certified(o));
}

TEST(OracleRkm, IterationCapRaisesConvergenceError) {
  auto data = fixtures::spd_data(50, 4, 20.0, 6);
  EXPECT_THROW(oracle_rkm(*data, 1e-14, 1), ConvergenceError);
}

TEST(OracleLrmc, GroundTruthAndMissingTruth) {
  auto data = fixtures::lrmc_data(300, 20, 2, 6.0, 7);
  const OracleResult o = oracle_lrmc(data);
  EXPECT_EQ(o.method, OracleMethod::GroundTruth);
  EXPECT_LE(o.cost, 1e-12);
  LrmcDataset bare = *data;
  bare.truth_basis.reset();
  bare.truth_coeffs.reset();
  EXPECT_THROW(oracle_lrmc(std::make_shared<const LrmcDataset>(bare)), ConfigError);
}
