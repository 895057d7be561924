#include <cmath>

#include <gtest/gtest.h>

#include "rvr/errors.hpp"
#include "rvr/manifold.hpp"
#include "rvr/spd_functions.hpp"

using namespace rvr;

namespace {

const ManifoldDescriptor kGr = ManifoldDescriptor::grassmann(3, 8);
const ManifoldDescriptor kSpd = ManifoldDescriptor::spd(4);

ManifoldPoint spd_point(const Eigen::VectorXd& diag) {
  return ManifoldPoint(ManifoldDescriptor::spd(diag.size()), diag.asDiagonal());
}

double point_gap(const ManifoldPoint& a, const ManifoldPoint& b) {
  return a.descriptor().kind == ManifoldKind::Grassmann ? distance(a, b)
                                                        : (a.data() - b.data()).norm();
}

class BothManifolds : public ::testing::TestWithParam<ManifoldDescriptor> {};

}  // namespace

TEST(Descriptor, ValidatesShapes) {
  EXPECT_THROW(ManifoldDescriptor::grassmann(5, 3).validate(), ShapeError);
  EXPECT_THROW(ManifoldDescriptor::spd(0).validate(), ShapeError);
  EXPECT_EQ(kGr.rows(), 8);
  EXPECT_EQ(kGr.cols(), 3);
  EXPECT_EQ(kSpd.cols(), 4);
}

TEST(ManifoldPoint, RejectsInvalidRepresentatives) {
  EXPECT_THROW(ManifoldPoint(kGr, Eigen::MatrixXd::Ones(8, 3)), NumericalError);
  EXPECT_THROW(ManifoldPoint(kSpd, -Eigen::MatrixXd::Identity(4, 4)), NumericalError);
  EXPECT_THROW(ManifoldPoint(kSpd, Eigen::MatrixXd::Identity(3, 3)), ShapeError);
}

TEST(TangentVector, RejectsNonTangentData) {
  Rng rng(1);
  const ManifoldPoint x = random_point(kGr, rng);
  EXPECT_FALSE(TangentVector(x, x.data()).satisfies_invariants());
  const ManifoldPoint y = random_point(kGr, rng);
  EXPECT_THROW(random_tangent(x, rng) + random_tangent(y, rng), BasePointMismatch);
}

TEST(Inner, SpdIdentityTraceAndSymmetry) {
  const ManifoldPoint x = spd_point(Eigen::VectorXd::Ones(4));
  const TangentVector i(x, Eigen::MatrixXd::Identity(4, 4));
  EXPECT_DOUBLE_EQ(inner(x, i, i), 4.0);
  Rng rng(2);
  const ManifoldPoint g = random_point(kGr, rng);
  const TangentVector u = random_tangent(g, rng), v = random_tangent(g, rng);
  EXPECT_NEAR(inner(g, u, v), inner(g, v, u), 1e-14);
  EXPECT_EQ(inner(g, zero_tangent(g), zero_tangent(g)), 0.0);
  EXPECT_GT(inner(g, u, u), 0.0);
}

TEST(Project, GrassmannAnnihilatesColumnSpace) {
  Rng rng(3);
  const ManifoldPoint x = random_point(kGr, rng);
  EXPECT_LT(project_tangent(x, x.data()).data().norm(), 1e-14);
  EXPECT_EQ(project_tangent(x, Eigen::MatrixXd::Zero(8, 3)).data().norm(), 0.0);
  Eigen::MatrixXd c(3, 3);
  c << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  EXPECT_LT(egrad_to_rgrad(x, x.data() * c).data().norm(), 1e-13);
}

TEST(Retract, SpdExponentialAtIdentityIsElementwiseExp) {
  const ManifoldPoint x = spd_point(Eigen::VectorXd::Ones(3));
  const Eigen::Vector3d s(0.3, -1.2, 2.0);
  const ManifoldPoint y = retract(x, TangentVector(x, s.asDiagonal()), RetractionMode::Exponential);
  EXPECT_LT((y.data() - Eigen::MatrixXd(s.array().exp().matrix().asDiagonal())).norm(), 1e-12);
}

TEST(InverseRetract, SpdLogAtIdentity) {
  const ManifoldPoint x = spd_point(Eigen::VectorXd::Ones(3));
  const ManifoldPoint y = spd_point(Eigen::Vector3d(std::exp(1.0), 1.0, 1.0));
  const TangentVector l = inverse_retract(x, y, RetractionMode::Exponential);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
  expected(0, 0) = 1.0;
  EXPECT_LT((l.data() - expected).norm(), 1e-14);
  EXPECT_NEAR(distance(x, y), 1.0, 1e-14);
}

TEST(InverseRetract, SpdFirstOrderOutsideDomainThrows) {
  const ManifoldPoint x = spd_point(Eigen::VectorXd::Ones(2));
  const ManifoldPoint y = spd_point(Eigen::Vector2d(0.25, 1.0));
  EXPECT_THROW(inverse_retract(x, y, RetractionMode::FirstOrder), OutOfInjectivityRadius);
}

TEST(Grassmann, PrincipalAnglesOfCoordinatePlanes) {
  const ManifoldDescriptor g = ManifoldDescriptor::grassmann(1, 2);
  const ManifoldPoint e1(g, Eigen::Vector2d(1, 0));
  const ManifoldPoint diag(g, Eigen::Vector2d(1, 1).normalized());
  EXPECT_NEAR(principal_angles(e1, diag)(0), M_PI / 4, 1e-14);
  EXPECT_NEAR(distance(e1, diag), M_PI / 4, 1e-14);
  const ManifoldPoint flipped(g, Eigen::Vector2d(-1, 0));
  EXPECT_NEAR(distance(e1, flipped), 0.0, 1e-7);
}

TEST(Grassmann, QfHasPositiveDiagonal) {
  Rng rng(4);
  const Eigen::MatrixXd a = rng.normal_matrix(6, 3);
  const Eigen::MatrixXd q = qf(a);
  const Eigen::MatrixXd r = q.transpose() * a;
  for (int i = 0; i < 3; ++i) EXPECT_GT(r(i, i), 0.0);
  EXPECT_LT((q * r - a).norm(), 1e-12);
}

TEST_P(BothManifolds, RandomDrawsSatisfyInvariantsAndAreDeterministic) {
  Rng a(5), b(5);
  for (int i = 0; i < 1000; ++i) {
    const ManifoldPoint x = random_point(GetParam(), a);
    const ManifoldPoint y = random_point(GetParam(), b);
    ASSERT_TRUE(x.satisfies_invariants());
    ASSERT_TRUE(x.same_as(y));
    const TangentVector u = random_tangent(x, a);
    random_tangent(y, b);
    ASSERT_TRUE(u.satisfies_invariants());
    ASSERT_NEAR(norm(x, u), 1.0, 1e-12);
  }
}

TEST_P(BothManifolds, ZeroStepIdentities) {
  Rng rng(6);
  const ManifoldPoint x = random_point(GetParam(), rng);
  const TangentVector v = random_tangent(x, rng);
  for (RetractionMode mode : {RetractionMode::FirstOrder, RetractionMode::Exponential}) {
    EXPECT_LT(point_gap(retract(x, zero_tangent(x), mode), x), 1e-12);
    EXPECT_LT(inverse_retract(x, x, mode).data().norm(), 1e-12);
  }
  for (TransportKind kind : {TransportKind::Projection, TransportKind::Parallel})
    EXPECT_LT((transport(x, zero_tangent(x), v, kind).data() - v.data()).norm(), 1e-12);
  EXPECT_EQ(distance(x, x), 0.0);
}

TEST_P(BothManifolds, ProjectionIsIdempotent) {
  Rng rng(7);
  const ManifoldPoint x = random_point(GetParam(), rng);
  const TangentVector p = project_tangent(x, rng.normal_matrix(x.data().rows(), x.data().cols()));
  EXPECT_LT((project_tangent(x, p.data()).data() - p.data()).norm(), 1e-12);
}

TEST_P(BothManifolds, RoundTripsAndDistanceConsistency) {
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const ManifoldPoint x = random_point(GetParam(), rng);
    const TangentVector xi = (0.1 + 0.01 * i) * random_tangent(x, rng);
    for (RetractionMode mode : {RetractionMode::FirstOrder, RetractionMode::Exponential}) {
      const ManifoldPoint y = retract(x, xi, mode);
      const ManifoldPoint y2 = retract(x, inverse_retract(x, y, mode), mode);
      ASSERT_LT(point_gap(y, y2), 1e-8);
    }
    const ManifoldPoint z = retract(x, xi, RetractionMode::Exponential);
    ASSERT_NEAR(distance(x, z), norm(x, inverse_retract(x, z, RetractionMode::Exponential)), 1e-8);
    ASSERT_NEAR(distance(x, z), norm(x, xi), 1e-8);
  }
}

TEST_P(BothManifolds, ParallelTransportIsAnIsometry) {
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const ManifoldPoint x = random_point(GetParam(), rng);
    const TangentVector xi = 0.8 * random_tangent(x, rng);
    const TangentVector u = random_tangent(x, rng), v = random_tangent(x, rng);
    const TangentVector tu = transport(x, xi, u, TransportKind::Parallel);
    const TangentVector tv = transport(x, xi, v, TransportKind::Parallel);
    ASSERT_TRUE(tu.satisfies_invariants());
    // Metric evaluations at SPD points lose about eps·cond(Y) in float64.
    double tol = 1e-10;
    if (GetParam().kind == ManifoldKind::SPD) {
      const Eigen::VectorXd ev = spd::eigh(tu.base().data()).values;
      tol += 1e-16 * ev(ev.size() - 1) / ev(0);
    }
    ASSERT_NEAR(norm(tu.base(), tu), norm(x, u), tol);
    ASSERT_NEAR(inner(tu.base(), tu, tv), inner(x, u, v), tol);
  }
}

TEST_P(BothManifolds, TransportToMatchesTransportAlongGeodesic) {
  Rng rng(10);
  const ManifoldPoint x = random_point(GetParam(), rng);
  const TangentVector xi = 0.5 * random_tangent(x, rng);
  const TangentVector v = random_tangent(x, rng);
  const TangentVector a = transport(x, xi, v, TransportKind::Parallel);
  const TangentVector b = transport_to(x, a.base(), v, TransportKind::Parallel);
  EXPECT_LT((a.data() - b.data()).norm(), 1e-9);
  const TangentVector p = transport(x, xi, v, TransportKind::Projection);
  EXPECT_TRUE(p.satisfies_invariants());
}

INSTANTIATE_TEST_SUITE_P(Manifolds, BothManifolds, ::testing::Values(kGr, kSpd),
                         [](const auto& info) {
                           return info.param.kind == ManifoldKind::Grassmann ? "Grassmann" : "Spd";
                         });
