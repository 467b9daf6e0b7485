#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "variety/errors.hpp"
#include "variety/features.hpp"

using namespace variety;

namespace {

// binom(n + d, d) by Pascal's rule.
std::int64_t pascal(int n, int d) {
  std::vector<std::vector<std::int64_t>> c(n + d + 1, std::vector<std::int64_t>(n + d + 1, 0));
  for (int i = 0; i <= n + d; ++i) {
    c[i][0] = 1;
    for (int j = 1; j <= i; ++j) c[i][j] = c[i - 1][j - 1] + c[i - 1][j];
  }
  return c[n + d][d];
}

double monomial(const Eigen::VectorXd& x, const features::Exponent& e) {
  double v = 1.0;
  for (std::size_t k = 0; k < e.size(); ++k) v *= std::pow(x(static_cast<Eigen::Index>(k)), e[k]);
  return v;
}

}  // namespace

TEST_CASE("dimension matches Pascal's triangle") {
  for (int n = 1; n <= 6; ++n) {
    for (int d = 1; d <= 6; ++d) CHECK(features::dimension(n, d) == pascal(n, d));
  }
  CHECK(features::dimension(2, 2) == 6);
  CHECK(features::dimension(3, 2) == 10);
  CHECK(features::dimension(2, 4) == 15);
}

TEST_CASE("dimension rejects bad input and overflow") {
  CHECK_THROWS_AS(features::dimension(0, 2), InvalidArgument);
  CHECK_THROWS_AS(features::dimension(2, 0), InvalidArgument);
  CHECK_THROWS_AS(features::dimension(60, 60), std::overflow_error);
}

TEST_CASE("basis order for two variables, degree two") {
  const auto b = features::build_basis(2, 2);
  REQUIRE(b.size() == 6);
  const std::vector<features::Exponent> expect{{0, 0}, {0, 1}, {1, 0}, {0, 2}, {1, 1}, {2, 0}};
  CHECK(b.exponents == expect);
}

TEST_CASE("basis is graded and complete") {
  for (int n = 1; n <= 4; ++n) {
    for (int d = 1; d <= 4; ++d) {
      const auto b = features::build_basis(n, d);
      CHECK(b.size() == features::dimension(n, d));
      std::set<features::Exponent> unique(b.exponents.begin(), b.exponents.end());
      CHECK(unique.size() == b.exponents.size());
      int prev = 0;
      for (const auto& e : b.exponents) {
        const int deg = std::accumulate(e.begin(), e.end(), 0);
        CHECK(deg >= prev);
        CHECK(deg <= d);
        prev = deg;
      }
    }
  }
}

TEST_CASE("basis size guardrail") {
  CHECK(features::dimension(10, 10) > features::kMaxBasisSize);
  CHECK_THROWS_AS(features::build_basis(10, 10), InvalidArgument);
  CHECK_NOTHROW(features::build_basis(3, 10));
}

TEST_CASE("feature map agrees with direct monomial evaluation") {
  const auto b = features::build_basis(3, 3);
  const Eigen::MatrixXd pts = testing::gaussian(3, 20, 11);
  const Eigen::MatrixXd phi = features::feature_matrix(pts, b);
  REQUIRE(phi.rows() == b.size());
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    const Eigen::VectorXd x = pts.col(i);
    for (Eigen::Index k = 0; k < b.size(); ++k) {
      CHECK(phi(k, i) == doctest::Approx(monomial(x, b.exponents[static_cast<std::size_t>(k)])).epsilon(1e-13));
    }
    CHECK((features::feature_map(x, b) - phi.col(i)).norm() == doctest::Approx(0.0));
  }
  CHECK_THROWS_AS(features::feature_matrix(testing::gaussian(2, 3, 1), b), InvalidArgument);
}

TEST_CASE("feature jacobian and hessians match finite differences") {
  const auto b = features::build_basis(2, 4);
  const Eigen::VectorXd x = testing::gaussian(2, 1, 5);
  const Eigen::MatrixXd jac = features::feature_jacobian(x, b);
  const auto hess = features::feature_hessians(x, b);
  constexpr double h = 1e-6;
  for (Eigen::Index j = 0; j < 2; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
    e(j) = h;
    const Eigen::VectorXd fd = (features::feature_map(x + e, b) - features::feature_map(x - e, b)) / (2 * h);
    CHECK((fd - jac.col(j)).norm() < 1e-7);
    const Eigen::MatrixXd fdj = (features::feature_jacobian(x + e, b) - features::feature_jacobian(x - e, b)) / (2 * h);
    for (Eigen::Index k = 0; k < b.size(); ++k) {
      CHECK((fdj.row(k).transpose() - hess[static_cast<std::size_t>(k)].col(j)).norm() < 1e-6);
    }
  }
  const Eigen::VectorXd w = testing::gaussian(b.size(), 1, 6);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(2, 2);
  for (Eigen::Index k = 0; k < b.size(); ++k) sum += w(k) * hess[static_cast<std::size_t>(k)];
  CHECK((features::weighted_hessian(x, b, w) - sum).norm() < 1e-12);
}
