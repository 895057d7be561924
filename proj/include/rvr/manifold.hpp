#pragma once

#include <memory>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "rvr/rng.hpp"

namespace rvr {

enum class ManifoldKind { Grassmann, SPD };
enum class RetractionMode { FirstOrder, Exponential };
enum class TransportKind { Parallel, Projection };

std::string to_string(ManifoldKind kind);
std::string to_string(RetractionMode mode);
std::string to_string(TransportKind kind);

struct ManifoldDescriptor {
  ManifoldKind kind = ManifoldKind::Grassmann;
  Eigen::Index d = 1;
  Eigen::Index r = 1;  // Grassmann only

  static ManifoldDescriptor grassmann(Eigen::Index r, Eigen::Index d);
  static ManifoldDescriptor spd(Eigen::Index d);

  Eigen::Index rows() const { return d; }
  Eigen::Index cols() const { return kind == ManifoldKind::Grassmann ? r : d; }
  void validate() const;

  friend bool operator==(const ManifoldDescriptor&, const ManifoldDescriptor&) = default;
};

// Cached spectral factors of an SPD point: X^{1/2}, X^{-1/2}, X^{-1}.
struct SpdFactors {
  Eigen::MatrixXd sqrt;
  Eigen::MatrixXd inv_sqrt;
  Eigen::MatrixXd inv;
};

// Immutable point on Grassmann(r, d) (orthonormal d×r representative) or on
// SPD(d). Copies share storage.
class ManifoldPoint {
 public:
  // Validates the type invariants; throws NumericalError / ShapeError.
  ManifoldPoint(const ManifoldDescriptor& desc, Eigen::MatrixXd data);

  const ManifoldDescriptor& descriptor() const { return state_->desc; }
  const Eigen::MatrixXd& data() const { return state_->data; }
  const SpdFactors& spd() const;

  // Same descriptor and identical matrix entries.
  bool same_as(const ManifoldPoint& other) const;

  bool satisfies_invariants() const;

 private:
  struct State {
    ManifoldDescriptor desc;
    Eigen::MatrixXd data;
    std::optional<SpdFactors> factors;
  };
  std::shared_ptr<const State> state_;
};

class TangentVector {
 public:
  TangentVector(ManifoldPoint base, Eigen::MatrixXd data);

  const ManifoldPoint& base() const { return base_; }
  const Eigen::MatrixXd& data() const { return data_; }

  bool satisfies_invariants() const;

  TangentVector& operator+=(const TangentVector& other);
  TangentVector& operator-=(const TangentVector& other);
  TangentVector& operator*=(double s);

 private:
  ManifoldPoint base_;
  Eigen::MatrixXd data_;
};

TangentVector operator+(TangentVector a, const TangentVector& b);
TangentVector operator-(TangentVector a, const TangentVector& b);
TangentVector operator*(double s, TangentVector a);

TangentVector zero_tangent(const ManifoldPoint& x);

double inner(const ManifoldPoint& x, const TangentVector& u, const TangentVector& v);
double norm(const ManifoldPoint& x, const TangentVector& u);

TangentVector project_tangent(const ManifoldPoint& x, const Eigen::MatrixXd& a);
TangentVector egrad_to_rgrad(const ManifoldPoint& x, const Eigen::MatrixXd& g);

ManifoldPoint retract(const ManifoldPoint& x, const TangentVector& xi,
                      RetractionMode mode);
TangentVector inverse_retract(const ManifoldPoint& x, const ManifoldPoint& y,
                              RetractionMode mode);

// Transport v ∈ T_xM along xi. Projection targets retract(x, xi, FirstOrder);
// Parallel targets the geodesic endpoint retract(x, xi, Exponential).
TangentVector transport(const ManifoldPoint& x, const TangentVector& xi,
                        const TangentVector& v, TransportKind kind);

// Transport v ∈ T_xM to T_yM. Parallel goes along the connecting geodesic and
// re-expresses the result in y's representative.
TangentVector transport_to(const ManifoldPoint& x, const ManifoldPoint& y,
                           const TangentVector& v, TransportKind kind);

double distance(const ManifoldPoint& x, const ManifoldPoint& y);

// Grassmann principal angles, ascending.
Eigen::VectorXd principal_angles(const ManifoldPoint& x, const ManifoldPoint& y);

ManifoldPoint random_point(const ManifoldDescriptor& desc, Rng& rng);
TangentVector random_tangent(const ManifoldPoint& x, Rng& rng);

// Q factor of a thin QR with the diagonal of R forced positive.
Eigen::MatrixXd qf(const Eigen::MatrixXd& a);

}  // namespace rvr
