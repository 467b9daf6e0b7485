#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "variety/denoise.hpp"
#include "variety/sure.hpp"
#include "variety/synth.hpp"

using namespace variety;

namespace {

VarietyModel unit_circle_model() {
  Eigen::VectorXd c(6);
  c << -1, 0, 0, 1, 0, 1;
  return VarietyModel{manifolds::orthonormalize(c), features::build_basis(2, 2)};
}

}  // namespace

TEST_CASE("SURE formula on hand values") {
  const PointCloud m_hat(Eigen::MatrixXd::Ones(2, 3));
  const PointCloud x(Eigen::MatrixXd::Zero(2, 3));
  // 6 - 6 * 0.01 + 2 * 0.01 * 4
  const SureReport r = sure_estimate(m_hat, x, 4.0, 0.1);
  CHECK(r.r_hat == doctest::Approx(6.0 - 0.06 + 0.08));
  CHECK(r.sure_rmse == doctest::Approx(std::sqrt(r.r_hat / 6.0)));
  CHECK_FALSE(r.clamped);
  CHECK_FALSE(r.divergence_out_of_range);
}

TEST_CASE("negative SURE is clamped for the RMSE") {
  const PointCloud m(Eigen::MatrixXd::Zero(2, 3));
  const SureReport r = sure_estimate(m, m, 0.0, 1.0);
  CHECK(r.r_hat == doctest::Approx(-6.0));
  CHECK(r.clamped);
  CHECK(r.sure_rmse == 0.0);
  CHECK(sure_estimate(m, m, 7.0, 1.0).divergence_out_of_range);
}

TEST_CASE("xx_hessian blocks match a finite-difference Hessian of the cost") {
  manifolds::Rng rng(1);
  const auto basis = features::build_basis(2, 3);
  const VarietyModel model{manifolds::random_grassmann(basis.size(), 2, rng), basis};
  const Eigen::MatrixXd m_hat = testing::gaussian(2, 5, 2);
  const Eigen::MatrixXd x = m_hat + 0.2 * testing::gaussian(2, 5, 3);
  constexpr double lambda = 0.7;
  auto cost = [&](const Eigen::MatrixXd& y) { return residual(model, y) + lambda * (y - m_hat).squaredNorm(); };
  const Eigen::MatrixXd dense = xx_hessian(model, x, lambda).dense();
  REQUIRE(dense.rows() == 10);
  CHECK((dense - dense.transpose()).norm() < 1e-12);
  constexpr double h = 1e-4;
  for (Eigen::Index a = 0; a < 10; ++a) {
    for (Eigen::Index b = 0; b < 10; ++b) {
      Eigen::MatrixXd ea = Eigen::MatrixXd::Zero(2, 5), eb = ea;
      ea.data()[a] = h;
      eb.data()[b] = h;
      const double fd = (cost(x + ea + eb) - cost(x + ea - eb) - cost(x - ea + eb) + cost(x - ea - eb)) / (4 * h * h);
      CHECK(dense(a, b) == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
    }
  }
}

TEST_CASE("block apply agrees with the dense operator") {
  manifolds::Rng rng(4);
  const auto basis = features::build_basis(3, 2);
  const VarietyModel model{manifolds::random_grassmann(basis.size(), 2, rng), basis};
  const Eigen::MatrixXd x = testing::gaussian(3, 7, 5);
  const auto h = xx_hessian(model, x, 0.1);
  const Eigen::MatrixXd dir = testing::gaussian(3, 7, 6);
  const Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(dir.data(), dir.size());
  const Eigen::MatrixXd applied = h.apply(dir);
  CHECK((Eigen::Map<const Eigen::VectorXd>(applied.data(), applied.size()) - h.dense() * flat).norm() < 1e-12);
}

TEST_CASE("divergence equals the dense trace formula") {
  const Eigen::MatrixXd x = testing::circle_points(20) + 1e-3 * testing::gaussian(2, 20, 7);
  const auto model = unit_circle_model();
  constexpr double lambda = 0.01;
  const DivergenceResult d = divergence(model, x, lambda);
  const Eigen::MatrixXd dense = xx_hessian(model, x, lambda).dense();
  CHECK(d.value == doctest::Approx(2 * lambda * dense.inverse().trace()).epsilon(1e-10));
  CHECK(d.min_eigenvalue > 0.0);
  CHECK(d.condition_number == doctest::Approx(d.max_eigenvalue / d.min_eigenvalue));
}

TEST_CASE("divergence tends to n s as lambda grows") {
  const Eigen::MatrixXd x = testing::circle_points(30);
  const double div = divergence(unit_circle_model(), x, 1e8).value;
  CHECK(div / 60.0 == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("on the variety with lambda near zero only the normal direction is damped") {
  // Each block is 2 g g^T + 2 lambda I with g the unit normal scaled by |grad p|,
  // so the tangential eigenvalue is 2 lambda and contributes 1 to the divergence.
  const Eigen::MatrixXd x = testing::circle_points(10);
  const double lambda = 1e-6;
  const double div = divergence(unit_circle_model(), x, lambda).value;
  // |grad p|^2 = 4 / 3 on the unit circle for the normalized coefficient vector.
  const double normal = 2 * lambda / (2 * 4.0 / 3.0 + 2 * lambda);
  CHECK(div == doctest::Approx(10 * (1.0 + normal)).epsilon(1e-10));
}

TEST_CASE("indefinite blocks are reported as non-isolated") {
  // At the centre of the circle p Hess p = -(2/3) I and grad p = 0, so each
  // block is (2 lambda - 4/3) I.
  const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 3);
  CHECK_THROWS_AS(divergence(unit_circle_model(), x, 0.1), NotIsolatedMinimizer);
  CHECK_NOTHROW(divergence(unit_circle_model(), x, 1.0));
}

TEST_CASE("SURE for a denoising result is reported in caller units") {
  const PointCloud clean = synth::sample_circle(120, 1);
  const double sigma = 1e-2;
  const PointCloud noisy = synth::add_noise(clean, sigma, 2);
  PointCloud big = noisy;
  big.values *= 10.0;
  const DenoiseResult a = denoise(noisy);
  const DenoiseResult b = denoise(big);
  const SureReport ra = sure_for_result(noisy, a, sigma);
  const SureReport rb = sure_for_result(big, b, 10 * sigma);
  CHECK(rb.r_hat == doctest::Approx(100 * ra.r_hat).epsilon(1e-3));
  CHECK(ra.divergence == doctest::Approx(rb.divergence).epsilon(1e-3));
  const double err = (clean.values - a.x_star.values).squaredNorm();
  CHECK(ra.r_hat == doctest::Approx(err).epsilon(0.5));
}

TEST_CASE("full Hessian diagnostics respect the size cap") {
  const PointCloud noisy = synth::add_noise(synth::sample_circle(30, 3), 1e-2, 4);
  const DenoiseResult r = denoise(noisy);
  const auto cond = full_hessian_condition(r.model, r.x_scaled.values, scale_to_box(noisy).cloud.values,
                                           r.lambda_final);
  REQUIRE(cond.has_value());
  CHECK(*cond >= 1.0);
  CHECK_FALSE(full_hessian_condition(r.model, r.x_scaled.values, scale_to_box(noisy).cloud.values,
                                     r.lambda_final, 10)
                  .has_value());
}

TEST_CASE("degree sweep skips degrees with too few samples") {
  const PointCloud noisy = synth::add_noise(synth::sample_circle(12, 5), 1e-2, 6);
  const auto sweep = sure_by_degree(noisy, 1e-2, DenoiseOptions{}, 1, 4);
  // N - 1 = 2, 5, 9, 14 for degrees 1..4
  REQUIRE(sweep.size() == 3);
  CHECK(sweep.front().degree == 1);
  CHECK(sweep.back().degree == 3);
}
