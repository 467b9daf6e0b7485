#include "variety/manifolds.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>
#include <Eigen/QR>

#include "variety/errors.hpp"

namespace variety::manifolds {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const Eigen::MatrixXd& embedding(const FactorPoint& f) {
  return std::visit(
      overloaded{[](const EuclideanPoint& p) -> const Eigen::MatrixXd& { return p.value; },
                 [](const GrassmannPoint& p) -> const Eigen::MatrixXd& { return p.basis; },
                 [](const RotationPoint& p) -> const Eigen::MatrixXd& { return p.matrix; }},
      f);
}

Eigen::MatrixXd skew(const Eigen::MatrixXd& a) { return 0.5 * (a - a.transpose()); }
Eigen::MatrixXd sym(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

// Thin QR with R's diagonal made positive, so the factor is unique.
Eigen::MatrixXd qr_q_factor(const Eigen::MatrixXd& a) {
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  const auto& packed = qr.matrixQR();
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (packed(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

void check_shapes(const ProductPoint& x, const Ambient& a) {
  if (a.size() != x.factors.size()) {
    throw InvalidArgument("tangent/ambient factor count does not match point");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& e = embedding(x.factors[i]);
    if (a[i].rows() != e.rows() || a[i].cols() != e.cols()) {
      throw InvalidArgument("shape mismatch in factor " + std::to_string(i));
    }
  }
}

void repair_branch(Eigen::MatrixXd& q, int branch) {
  const double det = q.determinant();
  if ((det < 0.0) != (branch < 0)) q.col(0) *= -1.0;
}

}  // namespace

Ambient zeros_like(const ProductPoint& x) {
  Ambient out;
  out.reserve(x.factors.size());
  for (const auto& f : x.factors) {
    const auto& e = embedding(f);
    out.push_back(Eigen::MatrixXd::Zero(e.rows(), e.cols()));
  }
  return out;
}

std::size_t manifold_dimension(const ProductPoint& x) {
  std::size_t dim = 0;
  for (const auto& f : x.factors) {
    dim += std::visit(
        overloaded{[](const EuclideanPoint& p) { return static_cast<std::size_t>(p.value.size()); },
                   [](const GrassmannPoint& p) {
                     return static_cast<std::size_t>(p.basis.cols() * (p.basis.rows() - p.basis.cols()));
                   },
                   [](const RotationPoint& p) {
                     const auto n = static_cast<std::size_t>(p.matrix.rows());
                     return n * (n - 1) / 2;
                   }},
        f);
  }
  return dim;
}

double ambient_norm(const ProductPoint& x) {
  double sq = 0.0;
  for (const auto& f : x.factors) sq += embedding(f).squaredNorm();
  return std::sqrt(sq);
}

TangentVector project_tangent(const ProductPoint& x, const Ambient& ambient) {
  check_shapes(x, ambient);
  TangentVector out;
  out.parts.reserve(ambient.size());
  for (std::size_t i = 0; i < ambient.size(); ++i) {
    const auto& z = ambient[i];
    out.parts.push_back(std::visit(
        overloaded{[&](const EuclideanPoint&) -> Eigen::MatrixXd { return z; },
                   [&](const GrassmannPoint& p) -> Eigen::MatrixXd {
                     return z - p.basis * (p.basis.transpose() * z);
                   },
                   [&](const RotationPoint& p) -> Eigen::MatrixXd {
                     return p.matrix * skew(p.matrix.transpose() * z);
                   }},
        x.factors[i]));
  }
  return out;
}

ProductPoint retract(const ProductPoint& x, const TangentVector& v) {
  check_shapes(x, v.parts);
  ProductPoint out;
  out.factors.reserve(x.factors.size());
  for (std::size_t i = 0; i < x.factors.size(); ++i) {
    const auto& xi = v.parts[i];
    out.factors.push_back(std::visit(
        overloaded{[&](const EuclideanPoint& p) -> FactorPoint { return EuclideanPoint{p.value + xi}; },
                   [&](const GrassmannPoint& p) -> FactorPoint {
                     if (xi.isZero(0.0)) return p;
                     return GrassmannPoint{qr_q_factor(p.basis + xi)};
                   },
                   [&](const RotationPoint& p) -> FactorPoint {
                     if (xi.isZero(0.0)) return p;
                     Eigen::MatrixXd q = qr_q_factor(p.matrix + xi);
                     repair_branch(q, p.branch);
                     return RotationPoint{std::move(q), p.branch};
                   }},
        x.factors[i]));
  }
  return out;
}

double inner(const TangentVector& a, const TangentVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.parts.size(); ++i) {
    s += (a.parts[i].array() * b.parts[i].array()).sum();
  }
  return s;
}

double norm(const TangentVector& v) { return std::sqrt(inner(v, v)); }

TangentVector lincomb(double a, const TangentVector& u, double b, const TangentVector& v) {
  TangentVector out;
  out.parts.reserve(u.parts.size());
  for (std::size_t i = 0; i < u.parts.size(); ++i) out.parts.push_back(a * u.parts[i] + b * v.parts[i]);
  return out;
}

TangentVector scaled(double a, const TangentVector& v) {
  TangentVector out;
  out.parts.reserve(v.parts.size());
  for (const auto& p : v.parts) out.parts.push_back(a * p);
  return out;
}

void axpy(double a, const TangentVector& x, TangentVector& y) {
  for (std::size_t i = 0; i < x.parts.size(); ++i) y.parts[i] += a * x.parts[i];
}

TangentVector zero_tangent(const ProductPoint& x) { return TangentVector{zeros_like(x)}; }

TangentVector random_tangent(const ProductPoint& x, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Ambient z = zeros_like(x);
  for (auto& m : z) {
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = gauss(rng);
  }
  TangentVector t = project_tangent(x, z);
  const double nrm = norm(t);
  return nrm > 0.0 ? scaled(1.0 / nrm, t) : t;
}

TangentVector ehess_to_rhess(const ProductPoint& x, const Ambient& egrad, const Ambient& ehess,
                             const TangentVector& v) {
  check_shapes(x, egrad);
  check_shapes(x, ehess);
  Ambient corrected(ehess.size());
  for (std::size_t i = 0; i < ehess.size(); ++i) {
    corrected[i] = std::visit(
        overloaded{[&](const EuclideanPoint&) -> Eigen::MatrixXd { return ehess[i]; },
                   [&](const GrassmannPoint& p) -> Eigen::MatrixXd {
                     return ehess[i] - v.parts[i] * (p.basis.transpose() * egrad[i]);
                   },
                   [&](const RotationPoint& p) -> Eigen::MatrixXd {
                     return ehess[i] - v.parts[i] * sym(p.matrix.transpose() * egrad[i]);
                   }},
        x.factors[i]);
  }
  return project_tangent(x, corrected);
}

GrassmannPoint orthonormalize(const Eigen::MatrixXd& basis) {
  if (basis.cols() < 1 || basis.cols() > basis.rows()) {
    throw InvalidArgument("Grassmann basis must be N x q with 1 <= q <= N");
  }
  return GrassmannPoint{qr_q_factor(basis)};
}

RotationPoint random_rotation(Eigen::Index n, int branch, Rng& rng) {
  if (branch != 1 && branch != -1) throw InvalidArgument("branch must be +1 or -1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index k = 0; k < g.size(); ++k) g.data()[k] = gauss(rng);
  Eigen::MatrixXd q = qr_q_factor(g);
  repair_branch(q, branch);
  return RotationPoint{std::move(q), branch};
}

GrassmannPoint random_grassmann(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(rows, cols);
  for (Eigen::Index k = 0; k < g.size(); ++k) g.data()[k] = gauss(rng);
  return orthonormalize(g);
}

double invariant_violation(const ProductPoint& x) {
  double worst = 0.0;
  for (const auto& f : x.factors) {
    const double v = std::visit(
        overloaded{[](const EuclideanPoint&) { return 0.0; },
                   [](const GrassmannPoint& p) {
                     const auto q = p.basis.cols();
                     return (p.basis.transpose() * p.basis - Eigen::MatrixXd::Identity(q, q)).norm();
                   },
                   [](const RotationPoint& p) {
                     const auto n = p.matrix.rows();
                     const double orth =
                         (p.matrix.transpose() * p.matrix - Eigen::MatrixXd::Identity(n, n)).norm();
                     const double det = std::abs(p.matrix.determinant() - p.branch);
                     return std::max(orth, det);
                   }},
        f);
    worst = std::max(worst, v);
  }
  return worst;
}

double projector_distance(const Eigen::MatrixXd& u1, const Eigen::MatrixXd& u2) {
  return (u1 * u1.transpose() - u2 * u2.transpose()).norm();
}

const Eigen::MatrixXd& euclidean(const ProductPoint& x, std::size_t i) {
  if (const auto* p = std::get_if<EuclideanPoint>(&x.factors.at(i))) return p->value;
  throw InvalidArgument("factor " + std::to_string(i) + " is not Euclidean");
}

const Eigen::MatrixXd& grassmann(const ProductPoint& x, std::size_t i) {
  if (const auto* p = std::get_if<GrassmannPoint>(&x.factors.at(i))) return p->basis;
  throw InvalidArgument("factor " + std::to_string(i) + " is not a Grassmann point");
}

const RotationPoint& rotation(const ProductPoint& x, std::size_t i) {
  if (const auto* p = std::get_if<RotationPoint>(&x.factors.at(i))) return *p;
  throw InvalidArgument("factor " + std::to_string(i) + " is not a rotation");
}

}  // namespace variety::manifolds
