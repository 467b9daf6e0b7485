#include "variety/features.hpp"

#include <stdexcept>
#include <string>

#include "variety/errors.hpp"

namespace variety::features {
namespace {

// Table of x_j^e for e = 0..d; entry (j, e).
Eigen::MatrixXd power_table(const Eigen::Ref<const Eigen::VectorXd>& x, int d) {
  Eigen::MatrixXd p(x.size(), d + 1);
  p.col(0).setOnes();
  for (int e = 1; e <= d; ++e) p.col(e) = p.col(e - 1).cwiseProduct(x);
  return p;
}

void check_point(const Eigen::Ref<const Eigen::VectorXd>& x, const MonomialBasis& basis) {
  if (x.size() != basis.n) {
    throw InvalidArgument("point has " + std::to_string(x.size()) + " coordinates, basis expects " +
                          std::to_string(basis.n));
  }
}

// Product of x_m^{alpha_m - drop_m}, with drop applied to at most two
// coordinates. Callers ensure the exponents stay non-negative.
double reduced_monomial(const Eigen::MatrixXd& powers, const Exponent& alpha, int j, int l) {
  double v = 1.0;
  for (std::size_t m = 0; m < alpha.size(); ++m) {
    int e = alpha[m];
    if (static_cast<int>(m) == j) --e;
    if (static_cast<int>(m) == l) --e;
    v *= powers(static_cast<Eigen::Index>(m), e);
  }
  return v;
}

void enumerate(int n, int remaining, Exponent& prefix, std::vector<Exponent>& out) {
  if (static_cast<int>(prefix.size()) == n - 1) {
    prefix.push_back(remaining);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    prefix.push_back(e);
    enumerate(n, remaining - e, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::int64_t dimension(int n, int d) {
  if (n < 1 || d < 1) throw InvalidArgument("dimension: n and d must be positive");
  // C(n + k, k) = C(n + k - 1, k - 1) * (n + k) / k stays integral.
  std::int64_t c = 1;
  for (int k = 1; k <= d; ++k) {
    std::int64_t num = 0;
    if (__builtin_mul_overflow(c, static_cast<std::int64_t>(n) + k, &num)) {
      throw std::overflow_error("dimension: binomial coefficient overflows int64");
    }
    c = num / k;
  }
  return c;
}

MonomialBasis build_basis(int n, int d) {
  const std::int64_t count = dimension(n, d);
  if (count > kMaxBasisSize) {
    throw InvalidArgument("degree " + std::to_string(d) + " in dimension " + std::to_string(n) +
                          " needs " + std::to_string(count) + " monomials (limit " +
                          std::to_string(kMaxBasisSize) + ")");
  }
  MonomialBasis basis;
  basis.n = n;
  basis.d = d;
  basis.exponents.reserve(static_cast<std::size_t>(count));
  Exponent prefix;
  prefix.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t <= d; ++t) enumerate(n, t, prefix, basis.exponents);
  return basis;
}

Eigen::VectorXd feature_map(const Eigen::Ref<const Eigen::VectorXd>& x, const MonomialBasis& basis) {
  check_point(x, basis);
  const Eigen::MatrixXd powers = power_table(x, basis.d);
  Eigen::VectorXd phi(basis.size());
  for (Eigen::Index k = 0; k < basis.size(); ++k) {
    phi(k) = reduced_monomial(powers, basis.exponents[static_cast<std::size_t>(k)], -1, -1);
  }
  return phi;
}

Eigen::MatrixXd feature_matrix(const Eigen::MatrixXd& points, const MonomialBasis& basis) {
  if (points.rows() != basis.n) {
    throw InvalidArgument("feature_matrix: cloud has " + std::to_string(points.rows()) +
                          " rows, basis expects " + std::to_string(basis.n));
  }
  Eigen::MatrixXd phi(basis.size(), points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) phi.col(i) = feature_map(points.col(i), basis);
  return phi;
}

Eigen::MatrixXd feature_jacobian(const Eigen::Ref<const Eigen::VectorXd>& x,
                                 const MonomialBasis& basis) {
  check_point(x, basis);
  const Eigen::MatrixXd powers = power_table(x, basis.d);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(basis.size(), basis.n);
  for (Eigen::Index k = 0; k < basis.size(); ++k) {
    const auto& alpha = basis.exponents[static_cast<std::size_t>(k)];
    for (int j = 0; j < basis.n; ++j) {
      if (alpha[static_cast<std::size_t>(j)] == 0) continue;
      jac(k, j) = alpha[static_cast<std::size_t>(j)] * reduced_monomial(powers, alpha, j, -1);
    }
  }
  return jac;
}

std::vector<Eigen::MatrixXd> feature_hessians(const Eigen::Ref<const Eigen::VectorXd>& x,
                                              const MonomialBasis& basis) {
  check_point(x, basis);
  const Eigen::MatrixXd powers = power_table(x, basis.d);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(basis.exponents.size());
  for (const auto& alpha : basis.exponents) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(basis.n, basis.n);
    for (int j = 0; j < basis.n; ++j) {
      const int aj = alpha[static_cast<std::size_t>(j)];
      if (aj == 0) continue;
      if (aj >= 2) h(j, j) = aj * (aj - 1) * reduced_monomial(powers, alpha, j, j);
      for (int l = j + 1; l < basis.n; ++l) {
        const int al = alpha[static_cast<std::size_t>(l)];
        if (al == 0) continue;
        h(j, l) = h(l, j) = aj * al * reduced_monomial(powers, alpha, j, l);
      }
    }
    out.push_back(std::move(h));
  }
  return out;
}

Eigen::MatrixXd weighted_hessian(const Eigen::Ref<const Eigen::VectorXd>& x,
                                 const MonomialBasis& basis,
                                 const Eigen::Ref<const Eigen::VectorXd>& weights) {
  if (weights.size() != basis.size()) throw InvalidArgument("weighted_hessian: weight length != N");
  check_point(x, basis);
  const Eigen::MatrixXd powers = power_table(x, basis.d);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(basis.n, basis.n);
  for (Eigen::Index k = 0; k < basis.size(); ++k) {
    const double w = weights(k);
    if (w == 0.0) continue;
    const auto& alpha = basis.exponents[static_cast<std::size_t>(k)];
    for (int j = 0; j < basis.n; ++j) {
      const int aj = alpha[static_cast<std::size_t>(j)];
      if (aj == 0) continue;
      if (aj >= 2) h(j, j) += w * aj * (aj - 1) * reduced_monomial(powers, alpha, j, j);
      for (int l = j + 1; l < basis.n; ++l) {
        const int al = alpha[static_cast<std::size_t>(l)];
        if (al == 0) continue;
        const double v = w * aj * al * reduced_monomial(powers, alpha, j, l);
        h(j, l) += v;
        h(l, j) += v;
      }
    }
  }
  return h;
}

}  // namespace variety::features
