#include "rvr/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rvr/errors.hpp"
#include "rvr/spd_functions.hpp"

namespace rvr {

namespace {

constexpr double kOrthonormalTol = 1e-10;
constexpr double kSymmetryTol = 1e-12;
constexpr double kHorizontalTol = 1e-10;
// Smallest cosine of a principal angle accepted by the Grassmann inverse
// maps: angles must stay below π/2 − 1e-8.
const double kMinCosine = std::cos(std::numbers::pi / 2 - 1e-8);

bool is_grassmann(const ManifoldDescriptor& d) { return d.kind == ManifoldKind::Grassmann; }

void require_shape(const ManifoldPoint& x, const Eigen::MatrixXd& a, const char* what) {
  const auto& d = x.descriptor();
  if (a.rows() != d.rows() || a.cols() != d.cols())
    throw ShapeError(std::string(what) + ": expected " + std::to_string(d.rows()) + "x" +
                     std::to_string(d.cols()) + ", got " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()));
}

void require_base(const ManifoldPoint& x, const TangentVector& v, const char* what) {
  if (!v.base().same_as(x))
    throw BasePointMismatch(std::string(what) + ": tangent vector is not based at x");
}

void require_same_manifold(const ManifoldPoint& x, const ManifoldPoint& y, const char* what) {
  if (!(x.descriptor() == y.descriptor()))
    throw ShapeError(std::string(what) + ": points live on different manifolds");
}

void require_finite(const Eigen::MatrixXd& a, const char* what) {
  if (!a.allFinite()) throw NumericalError(std::string(what) + ": non-finite entries");
}

double scale_of(const Eigen::MatrixXd& a) { return std::max(1.0, a.norm()); }

struct ThinSvd {
  Eigen::MatrixXd u;
  Eigen::VectorXd s;
  Eigen::MatrixXd v;
};

ThinSvd thin_svd(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

// Exp_U(ξ) representative  U Q cos(S) Qᵀ + P sin(S) Qᵀ  with ξ = P S Qᵀ.
Eigen::MatrixXd grassmann_exp(const Eigen::MatrixXd& u, const ThinSvd& xi) {
  const Eigen::VectorXd c = xi.s.array().cos();
  const Eigen::VectorXd s = xi.s.array().sin();
  return u * xi.v * c.asDiagonal() * xi.v.transpose() + xi.u * s.asDiagonal() * xi.v.transpose();
}

// Parallel transport of v along t ↦ Exp_U(tξ) to t = 1.
Eigen::MatrixXd grassmann_parallel(const Eigen::MatrixXd& u, const ThinSvd& xi,
                                   const Eigen::MatrixXd& v) {
  const Eigen::VectorXd c = xi.s.array().cos();
  const Eigen::VectorXd s = xi.s.array().sin();
  const Eigen::MatrixXd ptv = xi.u.transpose() * v;
  return -u * xi.v * s.asDiagonal() * ptv + xi.u * c.asDiagonal() * ptv + v - xi.u * ptv;
}

// UᵀY must be invertible with all principal angles below π/2 − 1e-8.
Eigen::MatrixXd checked_overlap(const Eigen::MatrixXd& u, const Eigen::MatrixXd& y) {
  Eigen::MatrixXd m = u.transpose() * y;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  if (svd.singularValues().minCoeff() <= kMinCosine)
    throw OutOfInjectivityRadius("Grassmann inverse retraction: principal angle reaches pi/2");
  return m;
}

Eigen::MatrixXd grassmann_log(const Eigen::MatrixXd& u, const Eigen::MatrixXd& y) {
  const Eigen::MatrixXd m = checked_overlap(u, y);
  const Eigen::MatrixXd minv = m.partialPivLu().inverse();
  const Eigen::MatrixXd a = y * minv - u;
  ThinSvd svd = thin_svd(a - u * (u.transpose() * a));
  const Eigen::VectorXd theta = svd.s.array().atan();
  return svd.u * theta.asDiagonal() * svd.v.transpose();
}

Eigen::MatrixXd grassmann_project(const Eigen::MatrixXd& u, const Eigen::MatrixXd& a) {
  return a - u * (u.transpose() * a);
}

// Congruence helpers for SPD: X^{1/2} A X^{1/2} and X^{-1/2} A X^{-1/2}.
Eigen::MatrixXd lift(const ManifoldPoint& x, const Eigen::MatrixXd& a) {
  return spd::symmetrize(x.spd().sqrt * a * x.spd().sqrt);
}
Eigen::MatrixXd whiten(const ManifoldPoint& x, const Eigen::MatrixXd& a) {
  return spd::symmetrize(x.spd().inv_sqrt * a * x.spd().inv_sqrt);
}

}  // namespace

std::string to_string(ManifoldKind kind) {
  return kind == ManifoldKind::Grassmann ? "grassmann" : "spd";
}
std::string to_string(RetractionMode mode) {
  return mode == RetractionMode::FirstOrder ? "first_order" : "exponential";
}
std::string to_string(TransportKind kind) {
  return kind == TransportKind::Parallel ? "parallel" : "projection";
}

ManifoldDescriptor ManifoldDescriptor::grassmann(Eigen::Index r, Eigen::Index d) {
  ManifoldDescriptor desc{ManifoldKind::Grassmann, d, r};
  desc.validate();
  return desc;
}

ManifoldDescriptor ManifoldDescriptor::spd(Eigen::Index d) {
  ManifoldDescriptor desc{ManifoldKind::SPD, d, d};
  desc.validate();
  return desc;
}

void ManifoldDescriptor::validate() const {
  if (kind == ManifoldKind::Grassmann) {
    if (r < 1 || r > d) throw ShapeError("Grassmann requires 1 <= r <= d");
  } else if (d < 1) {
    throw ShapeError("SPD requires d >= 1");
  }
}

ManifoldPoint::ManifoldPoint(const ManifoldDescriptor& desc, Eigen::MatrixXd data) {
  desc.validate();
  if (data.rows() != desc.rows() || data.cols() != desc.cols())
    throw ShapeError("ManifoldPoint: data shape does not match descriptor");
  require_finite(data, "ManifoldPoint");
  auto state = std::make_shared<State>();
  state->desc = desc;
  state->data = std::move(data);
  if (desc.kind == ManifoldKind::Grassmann) {
    const Eigen::MatrixXd gram = state->data.transpose() * state->data;
    if ((gram - Eigen::MatrixXd::Identity(desc.r, desc.r)).norm() > kOrthonormalTol)
      throw NumericalError("ManifoldPoint: Grassmann representative is not orthonormal");
  } else {
    if (!spd::is_symmetric(state->data, kSymmetryTol * scale_of(state->data)))
      throw NumericalError("ManifoldPoint: SPD matrix is not symmetric");
    const spd::SymmetricEigen e = spd::eigh(state->data);
    if (!(e.values.minCoeff() > 0.0))
      throw NumericalError("ManifoldPoint: SPD matrix is not positive definite");
    SpdFactors f;
    f.sqrt = spd::apply(e, [](double v) { return std::sqrt(v); });
    f.inv_sqrt = spd::apply(e, [](double v) { return 1.0 / std::sqrt(v); });
    f.inv = spd::apply(e, [](double v) { return 1.0 / v; });
    state->factors = std::move(f);
  }
  state_ = std::move(state);
}

const SpdFactors& ManifoldPoint::spd() const {
  if (!state_->factors) throw ShapeError("spd factors requested for a Grassmann point");
  return *state_->factors;
}

bool ManifoldPoint::same_as(const ManifoldPoint& other) const {
  if (state_ == other.state_) return true;
  return descriptor() == other.descriptor() && data() == other.data();
}

bool ManifoldPoint::satisfies_invariants() const {
  const auto& d = descriptor();
  if (!data().allFinite()) return false;
  if (d.kind == ManifoldKind::Grassmann)
    return (data().transpose() * data() - Eigen::MatrixXd::Identity(d.r, d.r)).norm() <=
           kOrthonormalTol;
  return spd::is_symmetric(data(), kSymmetryTol * scale_of(data())) &&
         spd::eigh(data()).values.minCoeff() > 0.0;
}

TangentVector::TangentVector(ManifoldPoint base, Eigen::MatrixXd data)
    : base_(std::move(base)), data_(std::move(data)) {
  require_shape(base_, data_, "TangentVector");
#ifndef NDEBUG
  if (!satisfies_invariants()) throw NumericalError("TangentVector: invariant violated");
#endif
}

bool TangentVector::satisfies_invariants() const {
  if (!data_.allFinite()) return false;
  if (is_grassmann(base_.descriptor()))
    return (base_.data().transpose() * data_).norm() <= kHorizontalTol * scale_of(data_);
  return spd::is_symmetric(data_, kSymmetryTol * scale_of(data_));
}

TangentVector& TangentVector::operator+=(const TangentVector& other) {
  require_base(base_, other, "TangentVector::operator+=");
  data_ += other.data_;
  return *this;
}

TangentVector& TangentVector::operator-=(const TangentVector& other) {
  require_base(base_, other, "TangentVector::operator-=");
  data_ -= other.data_;
  return *this;
}

TangentVector& TangentVector::operator*=(double s) {
  data_ *= s;
  return *this;
}

TangentVector operator+(TangentVector a, const TangentVector& b) { return a += b; }
TangentVector operator-(TangentVector a, const TangentVector& b) { return a -= b; }
TangentVector operator*(double s, TangentVector a) { return a *= s; }

TangentVector zero_tangent(const ManifoldPoint& x) {
  const auto& d = x.descriptor();
  return TangentVector(x, Eigen::MatrixXd::Zero(d.rows(), d.cols()));
}

double inner(const ManifoldPoint& x, const TangentVector& u, const TangentVector& v) {
  require_base(x, u, "inner");
  require_base(x, v, "inner");
  if (is_grassmann(x.descriptor())) return (u.data().array() * v.data().array()).sum();
  const Eigen::MatrixXd a = x.spd().inv * u.data();
  const Eigen::MatrixXd b = x.spd().inv * v.data();
  return (a.array() * b.transpose().array()).sum();
}

double norm(const ManifoldPoint& x, const TangentVector& u) {
  return std::sqrt(std::max(0.0, inner(x, u, u)));
}

TangentVector project_tangent(const ManifoldPoint& x, const Eigen::MatrixXd& a) {
  require_shape(x, a, "project_tangent");
  if (is_grassmann(x.descriptor())) return TangentVector(x, grassmann_project(x.data(), a));
  return TangentVector(x, spd::symmetrize(a));
}

TangentVector egrad_to_rgrad(const ManifoldPoint& x, const Eigen::MatrixXd& g) {
  require_shape(x, g, "egrad_to_rgrad");
  if (is_grassmann(x.descriptor())) return TangentVector(x, grassmann_project(x.data(), g));
  return TangentVector(x, spd::symmetrize(x.data() * spd::symmetrize(g) * x.data()));
}

Eigen::MatrixXd qf(const Eigen::MatrixXd& a) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

ManifoldPoint retract(const ManifoldPoint& x, const TangentVector& xi, RetractionMode mode) {
  require_base(x, xi, "retract");
  require_finite(xi.data(), "retract");
  if (xi.data().isZero(0.0)) return x;
  const auto& desc = x.descriptor();
  Eigen::MatrixXd out;
  if (is_grassmann(desc)) {
    if (mode == RetractionMode::FirstOrder)
      out = qf(x.data() + xi.data());
    else
      out = grassmann_exp(x.data(), thin_svd(xi.data()));
  } else if (mode == RetractionMode::Exponential) {
    out = lift(x, spd::expm(whiten(x, xi.data())));
  } else {
    // X + ξ + ½ξX⁻¹ξ = X^{1/2} ½(I + (I + A)²) X^{1/2} with A = X^{-1/2} ξ X^{-1/2};
    // the whitened form stays positive definite under rounding.
    const Eigen::Index d = desc.d;
    const Eigen::MatrixXd b = Eigen::MatrixXd::Identity(d, d) + whiten(x, xi.data());
    out = lift(x, spd::symmetrize(0.5 * (Eigen::MatrixXd::Identity(d, d) + b * b)));
  }
  require_finite(out, "retract");
  return ManifoldPoint(desc, std::move(out));
}

TangentVector inverse_retract(const ManifoldPoint& x, const ManifoldPoint& y,
                              RetractionMode mode) {
  require_same_manifold(x, y, "inverse_retract");
  if (y.same_as(x)) return zero_tangent(x);
  if (is_grassmann(x.descriptor())) {
    if (mode == RetractionMode::Exponential)
      return project_tangent(x, grassmann_log(x.data(), y.data()));
    const Eigen::MatrixXd m = checked_overlap(x.data(), y.data());
    return project_tangent(x, y.data() * m.partialPivLu().inverse() - x.data());
  }
  const Eigen::MatrixXd z = whiten(x, y.data());
  if (mode == RetractionMode::Exponential) return TangentVector(x, lift(x, spd::logm(z)));
  // X + ξ + ½ξX⁻¹ξ = Y  ⇔  (I + η)² = 2Z − I  with η = X^{-1/2} ξ X^{-1/2}.
  const Eigen::MatrixXd w = 2.0 * z - Eigen::MatrixXd::Identity(z.rows(), z.cols());
  if (spd::eigh(w).values.minCoeff() <= 0.0)
    throw OutOfInjectivityRadius("SPD first-order inverse retraction: 2Z - I not positive");
  const Eigen::MatrixXd eta = spd::sqrtm(w) - Eigen::MatrixXd::Identity(z.rows(), z.cols());
  return TangentVector(x, lift(x, eta));
}

TangentVector transport(const ManifoldPoint& x, const TangentVector& xi, const TangentVector& v,
                        TransportKind kind) {
  require_base(x, xi, "transport");
  require_base(x, v, "transport");
  if (xi.data().isZero(0.0)) return v;
  if (kind == TransportKind::Projection) {
    const ManifoldPoint y = retract(x, xi, RetractionMode::FirstOrder);
    return project_tangent(y, v.data());
  }
  if (is_grassmann(x.descriptor())) {
    const ThinSvd svd = thin_svd(xi.data());
    const ManifoldPoint y(x.descriptor(), grassmann_exp(x.data(), svd));
    return project_tangent(y, grassmann_parallel(x.data(), svd, v.data()));
  }
  const ManifoldPoint y = retract(x, xi, RetractionMode::Exponential);
  const Eigen::MatrixXd e = x.spd().sqrt * spd::expm(0.5 * whiten(x, xi.data())) * x.spd().inv_sqrt;
  return TangentVector(y, spd::symmetrize(e * v.data() * e.transpose()));
}

TangentVector transport_to(const ManifoldPoint& x, const ManifoldPoint& y, const TangentVector& v,
                           TransportKind kind) {
  require_base(x, v, "transport_to");
  require_same_manifold(x, y, "transport_to");
  if (y.same_as(x)) return TangentVector(y, v.data());
  if (kind == TransportKind::Projection) return project_tangent(y, v.data());
  if (is_grassmann(x.descriptor())) {
    const ThinSvd svd = thin_svd(grassmann_log(x.data(), y.data()));
    const Eigen::MatrixXd endpoint = grassmann_exp(x.data(), svd);
    // Horizontal lifts rotate with the representative: ξ ↦ ξR when U ↦ UR.
    const Eigen::MatrixXd rot = endpoint.transpose() * y.data();
    return project_tangent(y, grassmann_parallel(x.data(), svd, v.data()) * rot);
  }
  const Eigen::MatrixXd e =
      x.spd().sqrt * spd::sqrtm(whiten(x, y.data())) * x.spd().inv_sqrt;
  return TangentVector(y, spd::symmetrize(e * v.data() * e.transpose()));
}

Eigen::VectorXd principal_angles(const ManifoldPoint& x, const ManifoldPoint& y) {
  require_same_manifold(x, y, "principal_angles");
  if (!is_grassmann(x.descriptor())) throw ShapeError("principal_angles: Grassmann only");
  const Eigen::MatrixXd& u = x.data();
  const Eigen::MatrixXd& w = y.data();
  Eigen::JacobiSVD<Eigen::MatrixXd> cos_svd(u.transpose() * w);
  Eigen::JacobiSVD<Eigen::MatrixXd> sin_svd(grassmann_project(u, w));
  const Eigen::VectorXd c = cos_svd.singularValues();  // descending
  const Eigen::VectorXd s = sin_svd.singularValues();  // descending
  const Eigen::Index r = c.size();
  Eigen::VectorXd theta(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    // Pair the i-th largest cosine with the i-th smallest sine.
    const double sine = (r - 1 - i) < s.size() ? s(r - 1 - i) : 0.0;
    theta(i) = std::atan2(sine, std::min(1.0, c(i)));
  }
  return theta;
}

double distance(const ManifoldPoint& x, const ManifoldPoint& y) {
  require_same_manifold(x, y, "distance");
  if (y.same_as(x)) return 0.0;
  if (is_grassmann(x.descriptor())) return principal_angles(x, y).norm();
  const Eigen::VectorXd lambda = spd::eigh(whiten(x, y.data())).values;
  return lambda.array().log().matrix().norm();
}

ManifoldPoint random_point(const ManifoldDescriptor& desc, Rng& rng) {
  desc.validate();
  if (desc.kind == ManifoldKind::Grassmann)
    return ManifoldPoint(desc, qf(rng.normal_matrix(desc.d, desc.r)));
  const Eigen::MatrixXd a = rng.normal_matrix(desc.d, desc.d);
  Eigen::MatrixXd x = a * a.transpose() + 1e-6 * Eigen::MatrixXd::Identity(desc.d, desc.d);
  return ManifoldPoint(desc, spd::symmetrize(x));
}

TangentVector random_tangent(const ManifoldPoint& x, Rng& rng) {
  const auto& d = x.descriptor();
  for (;;) {
    TangentVector v = project_tangent(x, rng.normal_matrix(d.rows(), d.cols()));
    const double n = norm(x, v);
    if (n > 0.0) return (1.0 / n) * std::move(v);
  }
}

}  // namespace rvr
