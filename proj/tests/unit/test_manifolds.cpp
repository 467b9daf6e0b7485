#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "variety/errors.hpp"
#include "variety/manifolds.hpp"
#include "variety/trust_region.hpp"

using namespace variety;
using namespace variety::manifolds;

namespace {

ProductPoint mixed_point(Rng& rng) {
  ProductPoint x;
  x.factors = {EuclideanPoint{testing::gaussian(2, 3, 1)}, random_grassmann(6, 2, rng),
               random_rotation(3, -1, rng)};
  return x;
}

// f(U) = trace(U^T A U) on Grass(N, q).
TRProblem rayleigh(const Eigen::MatrixXd& a) {
  TRProblem p;
  p.cost = [a](const ProductPoint& x) {
    const auto& u = grassmann(x, 0);
    return (u.transpose() * a * u).trace();
  };
  p.euclidean_gradient = [a](const ProductPoint& x) { return Ambient{2.0 * a * grassmann(x, 0)}; };
  p.euclidean_hessian = [a](const ProductPoint&, const TangentVector& v) { return Ambient{2.0 * a * v.parts[0]}; };
  return p;
}

}  // namespace

TEST_CASE("random factors satisfy their invariants") {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto q = random_rotation(4, t % 2 ? 1 : -1, rng);
    CHECK((q.matrix.transpose() * q.matrix - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-12);
    CHECK(q.matrix.determinant() == doctest::Approx(q.branch));
    const auto u = random_grassmann(7, 3, rng);
    CHECK((u.basis.transpose() * u.basis - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);
  }
  CHECK_THROWS_AS(random_rotation(3, 0, rng), InvalidArgument);
}

TEST_CASE("tangent projection is idempotent and lands in the tangent space") {
  Rng rng(4);
  const ProductPoint x = mixed_point(rng);
  Ambient a = zeros_like(x);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = testing::gaussian(a[i].rows(), a[i].cols(), 10 + i);
  const TangentVector v = project_tangent(x, a);
  const TangentVector vv = project_tangent(x, v.parts);
  CHECK(norm(lincomb(1.0, v, -1.0, vv)) < 1e-12);
  CHECK((grassmann(x, 1).transpose() * v.parts[1]).norm() < 1e-12);
  const Eigen::MatrixXd omega = rotation(x, 2).matrix.transpose() * v.parts[2];
  CHECK((omega + omega.transpose()).norm() < 1e-12);
  CHECK((v.parts[0] - a[0]).norm() == 0.0);
}

TEST_CASE("manifold dimension counts each factor") {
  Rng rng(5);
  const ProductPoint x = mixed_point(rng);
  // 2*3 + 2*(6-2) + 3
  CHECK(manifold_dimension(x) == 6u + 8u + 3u);
}

TEST_CASE("retraction preserves invariants and the rotation branch") {
  Rng rng(6);
  ProductPoint x = mixed_point(rng);
  for (int t = 0; t < 50; ++t) {
    TangentVector v = random_tangent(x, rng);
    x = retract(x, scaled(2.0, v));
    CHECK(invariant_violation(x) < 1e-12);
    CHECK(rotation(x, 2).branch == -1);
    CHECK(rotation(x, 2).matrix.determinant() == doctest::Approx(-1.0));
  }
}

TEST_CASE("retraction is first order") {
  Rng rng(7);
  const ProductPoint x = mixed_point(rng);
  const TangentVector v = random_tangent(x, rng);
  for (double h : {1e-3, 1e-4}) {
    const ProductPoint y = retract(x, scaled(h, v));
    for (std::size_t i = 1; i < 3; ++i) {
      const Eigen::MatrixXd base = i == 1 ? grassmann(x, 1) : rotation(x, 2).matrix;
      const Eigen::MatrixXd moved = i == 1 ? grassmann(y, 1) : rotation(y, 2).matrix;
      CHECK((moved - base - h * v.parts[i]).norm() < 10 * h * h);
    }
  }
}

TEST_CASE("projector distance ignores the choice of basis") {
  Rng rng(8);
  const auto u = random_grassmann(5, 2, rng);
  const auto r = random_rotation(2, 1, rng);
  CHECK(projector_distance(u.basis, u.basis * r.matrix) < 1e-12);
  const auto w = random_grassmann(5, 2, rng);
  CHECK(projector_distance(u.basis, w.basis) > 1e-3);
}

TEST_CASE("accessors reject the wrong factor kind") {
  Rng rng(9);
  const ProductPoint x = mixed_point(rng);
  CHECK_THROWS_AS(grassmann(x, 0), InvalidArgument);
  CHECK_THROWS_AS(euclidean(x, 2), InvalidArgument);
  CHECK_THROWS_AS(rotation(x, 1), InvalidArgument);
}

TEST_CASE("trust region recovers the smallest eigenspace") {
  Rng rng(10);
  const Eigen::MatrixXd g = testing::gaussian(8, 20, 12);
  const Eigen::MatrixXd a = g * g.transpose();
  ProductPoint x0;
  x0.factors = {random_grassmann(8, 2, rng)};
  TROptions opts;
  opts.gradient_tolerance = 1e-10;
  opts.check_invariants = true;
  const TRResult r = tr_minimize(rayleigh(a), x0, opts);
  CHECK(r.converged());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  CHECK(projector_distance(grassmann(r.point, 0), eig.eigenvectors().leftCols(2)) < 1e-8);
  CHECK(r.cost == doctest::Approx(eig.eigenvalues().head(2).sum()).epsilon(1e-10));
  for (std::size_t k = 1; k < r.cost_trace.size(); ++k) CHECK(r.cost_trace[k] <= r.cost_trace[k - 1] + 1e-12);
}

TEST_CASE("finite-difference Hessian fallback converges too") {
  Rng rng(11);
  const Eigen::MatrixXd g = testing::gaussian(6, 12, 13);
  TRProblem p = rayleigh(g * g.transpose());
  p.euclidean_hessian = nullptr;
  ProductPoint x0;
  x0.factors = {random_grassmann(6, 1, rng)};
  TROptions opts;
  opts.gradient_tolerance = 1e-8;
  CHECK(tr_minimize(p, x0, opts).converged());
}

TEST_CASE("exact and finite-difference Riemannian Hessians agree") {
  Rng rng(12);
  const Eigen::MatrixXd g = testing::gaussian(6, 12, 14);
  const TRProblem exact = rayleigh(g * g.transpose());
  TRProblem fd = exact;
  fd.euclidean_hessian = nullptr;
  ProductPoint x;
  x.factors = {random_grassmann(6, 2, rng)};
  const TangentVector grad = riemannian_gradient(exact, x);
  const TangentVector v = random_tangent(x, rng);
  const TangentVector h1 = riemannian_hessian(exact, x, grad, v);
  const TangentVector h2 = riemannian_hessian(fd, x, grad, v);
  CHECK(norm(lincomb(1.0, h1, -1.0, h2)) < 1e-5 * (1.0 + norm(h1)));
}

TEST_CASE("check_gradient flags a wrong gradient") {
  Rng rng(13);
  const Eigen::MatrixXd g = testing::gaussian(6, 12, 15);
  TRProblem p = rayleigh(g * g.transpose());
  ProductPoint x;
  x.factors = {random_grassmann(6, 2, rng)};
  CHECK(check_gradient(p, x) < 1e-6);
  p.euclidean_gradient = [](const ProductPoint& y) { return Ambient{3.0 * grassmann(y, 0)}; };
  CHECK(check_gradient(p, x) > 1e-3);
}

TEST_CASE("non-finite cost raises") {
  TRProblem p;
  p.cost = [](const ProductPoint&) { return std::nan(""); };
  p.euclidean_gradient = [](const ProductPoint& x) { return Ambient{euclidean(x, 0)}; };
  ProductPoint x;
  x.factors = {EuclideanPoint{Eigen::MatrixXd::Ones(2, 1)}};
  CHECK_THROWS_AS(tr_minimize(p, x), NonFiniteError);
}
