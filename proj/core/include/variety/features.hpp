#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace variety::features {

// Bases with more monomials than this are refused.
inline constexpr std::int64_t kMaxBasisSize = 20000;

// binom(n + d, d). Throws std::overflow_error if the value does not fit
// in int64.
std::int64_t dimension(int n, int d);

using Exponent = std::vector<int>;

// Monomials of total degree <= d in n variables. Ordered by ascending
// total degree, then lexicographically ascending within a degree, so the
// last coordinate's exponent varies fastest. For n = 2, d = 2:
//   1, y, x, y^2, xy, x^2
struct MonomialBasis {
  int n = 0;
  int d = 0;
  std::vector<Exponent> exponents;

  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(exponents.size()); }
  friend bool operator==(const MonomialBasis&, const MonomialBasis&) = default;
};

MonomialBasis build_basis(int n, int d);

// phi_d(x), length N.
Eigen::VectorXd feature_map(const Eigen::Ref<const Eigen::VectorXd>& x, const MonomialBasis& basis);

// N x s; column i is phi_d(x_i).
Eigen::MatrixXd feature_matrix(const Eigen::MatrixXd& points, const MonomialBasis& basis);

// N x n; entry (k, j) = d phi_k / d x_j.
Eigen::MatrixXd feature_jacobian(const Eigen::Ref<const Eigen::VectorXd>& x,
                                 const MonomialBasis& basis);

// One symmetric n x n second-derivative matrix per monomial.
std::vector<Eigen::MatrixXd> feature_hessians(const Eigen::Ref<const Eigen::VectorXd>& x,
                                              const MonomialBasis& basis);

// sum_k weights_k * Hess(phi_k)(x), i.e. the Hessian of the polynomial
// with coefficient vector `weights`.
Eigen::MatrixXd weighted_hessian(const Eigen::Ref<const Eigen::VectorXd>& x,
                                 const MonomialBasis& basis,
                                 const Eigen::Ref<const Eigen::VectorXd>& weights);

}  // namespace variety::features
