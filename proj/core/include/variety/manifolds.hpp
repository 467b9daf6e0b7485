#pragma once

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace variety::manifolds {

// Flat factor: R^{rows x cols}.
struct EuclideanPoint {
  Eigen::MatrixXd value;
};

// Point of Grass(N, q) represented by an N x q matrix with orthonormal
// columns. Only the column span is meaningful.
struct GrassmannPoint {
  Eigen::MatrixXd basis;
};

// Orthogonal n x n matrix on the connected component det = branch.
struct RotationPoint {
  Eigen::MatrixXd matrix;
  int branch = +1;
};

using FactorPoint = std::variant<EuclideanPoint, GrassmannPoint, RotationPoint>;

struct ProductPoint {
  std::vector<FactorPoint> factors;
};

// Per-factor matrices in the embedding space. Used both for raw ambient
// increments (Euclidean gradients) and for tangent vectors.
using Ambient = std::vector<Eigen::MatrixXd>;

// Tangent vectors are stored in the embedding: a Grassmann part satisfies
// U^T xi = 0 and a rotation part has the form Q * Omega, Omega skew.
struct TangentVector {
  Ambient parts;
};

using Rng = std::mt19937_64;

// Shape of every factor's embedding matrix.
Ambient zeros_like(const ProductPoint& x);

std::size_t manifold_dimension(const ProductPoint& x);

// Frobenius norm of all factor matrices stacked.
double ambient_norm(const ProductPoint& x);

TangentVector project_tangent(const ProductPoint& x, const Ambient& ambient);

// Grassmann: thin QR of U + xi with a positive diagonal in R.
// Rotation: QR of Q + xi, sign-repaired onto the point's branch.
ProductPoint retract(const ProductPoint& x, const TangentVector& v);

// Embedded (Frobenius) metric, summed over factors.
double inner(const TangentVector& a, const TangentVector& b);
double norm(const TangentVector& v);

TangentVector lincomb(double a, const TangentVector& u, double b, const TangentVector& v);
TangentVector scaled(double a, const TangentVector& v);
void axpy(double a, const TangentVector& x, TangentVector& y);

TangentVector zero_tangent(const ProductPoint& x);

// Unit-norm tangent with Gaussian ambient draw, projected.
TangentVector random_tangent(const ProductPoint& x, Rng& rng);

// Converts a Euclidean Hessian-vector product into the Riemannian one for
// the embedded metric. egrad is the Euclidean gradient at x.
TangentVector ehess_to_rhess(const ProductPoint& x, const Ambient& egrad,
                             const Ambient& ehess, const TangentVector& v);

// Factor constructors.
GrassmannPoint orthonormalize(const Eigen::MatrixXd& basis);
RotationPoint random_rotation(Eigen::Index n, int branch, Rng& rng);
GrassmannPoint random_grassmann(Eigen::Index rows, Eigen::Index cols, Rng& rng);

// Max deviation of each factor from its invariants (orthonormality,
// determinant branch). Zero for a flat factor.
double invariant_violation(const ProductPoint& x);

// || U1 U1^T - U2 U2^T ||_F.
double projector_distance(const Eigen::MatrixXd& u1, const Eigen::MatrixXd& u2);

// Convenience accessors; throw InvalidArgument when the factor has the
// wrong kind.
const Eigen::MatrixXd& euclidean(const ProductPoint& x, std::size_t i);
const Eigen::MatrixXd& grassmann(const ProductPoint& x, std::size_t i);
const RotationPoint& rotation(const ProductPoint& x, std::size_t i);

}  // namespace variety::manifolds
