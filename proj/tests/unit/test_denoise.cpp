#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "variety/denoise.hpp"
#include "variety/errors.hpp"
#include "variety/synth.hpp"
#include "variety/trust_region.hpp"

using namespace variety;

namespace {

// x^2 + y^2 - 1 in the (1, y, x, y^2, xy, x^2) basis.
VarietyModel unit_circle_model() {
  Eigen::VectorXd c(6);
  c << -1, 0, 0, 1, 0, 1;
  return VarietyModel{manifolds::orthonormalize(c), features::build_basis(2, 2)};
}

StageRecord stage(double lambda, double residual, double misfit) {
  StageRecord r;
  r.lambda = lambda;
  r.residual = residual;
  r.misfit = misfit;
  return r;
}

}  // namespace

TEST_CASE("residual of points on the circle vanishes") {
  const auto model = unit_circle_model();
  CHECK(residual(model, testing::circle_points(40)) < 1e-28);
  Eigen::MatrixXd off(2, 1);
  off << 2.0, 0.0;
  // (4 - 1)^2 / ||c||^2 with ||c||^2 = 3
  CHECK(residual(model, off) == doctest::Approx(3.0));
}

TEST_CASE("residual is invariant to the basis of the subspace") {
  manifolds::Rng rng(1);
  const auto basis = features::build_basis(2, 3);
  const auto u = manifolds::random_grassmann(basis.size(), 3, rng);
  const auto r = manifolds::random_rotation(3, -1, rng);
  const Eigen::MatrixXd x = testing::gaussian(2, 15, 2);
  const VarietyModel a{u, basis};
  const VarietyModel b{manifolds::GrassmannPoint{u.basis * r.matrix}, basis};
  CHECK(residual(a, x) == doctest::Approx(residual(b, x)).epsilon(1e-12));
}

TEST_CASE("sample count assumption") {
  CHECK_NOTHROW(check_sample_count(5, 6, 1));
  CHECK_THROWS_AS(check_sample_count(4, 6, 1), AssumptionViolation);
  try {
    check_sample_count(3, 10, 2);
  } catch (const AssumptionViolation& e) {
    CHECK(e.required_samples() == 8);
  }
}

TEST_CASE("initial guess recovers an exact variety") {
  const PointCloud clean(testing::circle_points(30));
  const InitialGuess g = init_guess(clean, 2, 1);
  CHECK((g.x0.values - clean.values).norm() == 0.0);
  CHECK(manifolds::projector_distance(g.u0.basis, unit_circle_model().subspace.basis) < 1e-10);
  CHECK(g.singular_values.size() == 6);
  for (Eigen::Index k = 1; k < g.singular_values.size(); ++k) {
    CHECK(g.singular_values(k) <= g.singular_values(k - 1));
  }
  CHECK_THROWS_AS(init_guess(clean, 2, 7), InvalidArgument);
}

TEST_CASE("penalized gradient in X matches finite differences of the cost") {
  manifolds::Rng rng(3);
  const auto basis = features::build_basis(2, 2);
  const Eigen::MatrixXd m_hat = testing::gaussian(2, 12, 4);
  const Eigen::MatrixXd x = m_hat + 0.1 * testing::gaussian(2, 12, 5);
  const VarietyModel model{manifolds::random_grassmann(basis.size(), 2, rng), basis};
  constexpr double lambda = 0.3;
  auto cost = [&](const Eigen::MatrixXd& y) { return residual(model, y) + lambda * (y - m_hat).squaredNorm(); };
  const Eigen::MatrixXd g = penalized_gradient_x(model, x, m_hat, lambda);
  constexpr double h = 1e-6;
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(2, 12);
    e.data()[t] = h;
    CHECK((cost(x + e) - cost(x - e)) / (2 * h) == doctest::Approx(g.data()[t]).epsilon(1e-6));
  }
}

TEST_CASE("penalized problem gradient is consistent along the manifold") {
  manifolds::Rng rng(6);
  const auto basis = features::build_basis(2, 3);
  const Eigen::MatrixXd m_hat = testing::gaussian(2, 20, 7);
  const auto problem = penalized_problem(m_hat, basis, 0.05);
  for (int t = 0; t < 5; ++t) {
    manifolds::ProductPoint x;
    x.factors = {manifolds::EuclideanPoint{m_hat + 0.1 * testing::gaussian(2, 20, 8 + t)},
                 manifolds::random_grassmann(basis.size(), 2, rng)};
    CHECK(manifolds::check_gradient(problem, x, t) < 1e-6);
  }
}

TEST_CASE("options validation") {
  DenoiseOptions o;
  CHECK_NOTHROW(o.validate());
  o.degree = 0;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  o = {};
  o.lambda_initial = 0.0;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  o = {};
  o.eta = -1.0;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  CHECK(stage_selection_from_string("l_curve") == StageSelection::l_curve);
  CHECK(to_string(StageSelection::noise_budget) == "noise_budget");
  CHECK_THROWS_AS(stage_selection_from_string("corner"), InvalidArgument);
}

TEST_CASE("balance selection takes the last stage under the ratio") {
  const std::vector<StageRecord> s{stage(1e-6, 1e-6, 1.0), stage(1e-5, 1e-12, 1.0), stage(1e-4, 1e-9, 1.0),
                                   stage(1e-3, 1e-14, 1.0)};
  CHECK(select_stage(s, StageSelection::balance, 1e-4, std::nullopt) == 3);
  CHECK(select_stage(s, StageSelection::balance, 1e-5, std::nullopt) == 3);
  CHECK(select_stage(s, StageSelection::balance, 1e-8, std::nullopt) == 0);
  CHECK(select_stage({stage(1, 1, 1), stage(10, 1e-9, 1), stage(100, 1, 1)}, StageSelection::balance, 1e-4,
                     std::nullopt) == 1);
}

TEST_CASE("noise budget selects the smallest qualifying lambda") {
  const std::vector<StageRecord> s{stage(1e-6, 0, 5.0), stage(1e-5, 0, 2.0), stage(1e-4, 0, 1.0),
                                   stage(1e-3, 0, 0.5)};
  CHECK(select_stage(s, StageSelection::noise_budget, 1e-4, 2.5) == 1);
  CHECK(select_stage(s, StageSelection::noise_budget, 1e-4, 10.0) == 0);
  CHECK(select_stage(s, StageSelection::noise_budget, 1e-4, 0.1) == 3);
  CHECK_THROWS_AS(select_stage(s, StageSelection::noise_budget, 1e-4, std::nullopt), InvalidArgument);
  CHECK_THROWS_AS(select_stage({}, StageSelection::balance, 1e-4, std::nullopt), InvalidArgument);
}

TEST_CASE("L-curve selection finds the corner") {
  // Misfit flat, then a sharp drop at stage 2.
  const std::vector<StageRecord> s{stage(1e-6, 0, 1.0), stage(1e-5, 0, 1.0), stage(1e-4, 0, 1.0),
                                   stage(1e-3, 0, 1e-6), stage(1e-2, 0, 1e-12)};
  CHECK(select_stage(s, StageSelection::l_curve, 1e-4, std::nullopt) == 2);
}

TEST_CASE("denoising a clean circle keeps it on the circle") {
  const PointCloud clean(testing::circle_points(50));
  const DenoiseResult r = denoise(clean);
  CHECK(r.stages.size() == 8);
  CHECK(r.residual < 1e-20);
  CHECK((r.x_star.values - clean.values).norm() < 1e-8);
}

TEST_CASE("continuation runs the geometric lambda schedule") {
  const PointCloud noisy = synth::add_noise(synth::sample_circle(60, 1), 1e-2, 2);
  DenoiseOptions o;
  o.max_stages = 4;
  o.lambda_multiplier = 100.0;
  const DenoiseResult r = denoise(noisy, o);
  REQUIRE(r.stages.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(r.stages[k].lambda == doctest::Approx(1e-6 * std::pow(100.0, static_cast<double>(k))));
  }
  CHECK(r.lambda_final == r.stages[r.selected_stage].lambda);
}

TEST_CASE("denoising lowers the residual and the error") {
  const PointCloud clean = synth::sample_circle(150, 3);
  const PointCloud noisy = synth::add_noise(clean, 1e-2, 4);
  const DenoiseResult r = denoise(noisy);
  CHECK(r.converged);
  CHECK(r.residual < 1e-8);
  CHECK(rmse(clean, r.x_star) < rmse(clean, noisy));
  CHECK(rmse(clean, r.x_star) < 1e-2);
  CHECK((unscale(r.x_scaled, r.scaling).values - r.x_star.values).norm() < 1e-12);
}

TEST_CASE("downward pass never raises a stage's penalized cost") {
  const PointCloud noisy = synth::add_noise(synth::sample_parabola(60, 5), 5e-2, 6);
  DenoiseOptions up;
  up.downward_pass = false;
  DenoiseOptions both;
  const DenoiseResult a = denoise(noisy, up);
  const DenoiseResult b = denoise(noisy, both);
  REQUIRE(a.stages.size() == b.stages.size());
  for (std::size_t k = 0; k < a.stages.size(); ++k) {
    const double ca = a.stages[k].residual + a.stages[k].lambda * a.stages[k].misfit;
    const double cb = b.stages[k].residual + b.stages[k].lambda * b.stages[k].misfit;
    CHECK(cb <= ca * (1 + 1e-9) + 1e-15);
    CHECK_FALSE(a.stages[k].refined);
  }
  CHECK_FALSE(b.stages.back().refined);
}

TEST_CASE("noise budget selection is honoured in original units") {
  const PointCloud noisy = synth::add_noise(synth::sample_circle(100, 7), 5e-2, 8);
  DenoiseOptions o;
  o.eta = 100 * 2 * 0.05 * 0.05;
  const DenoiseResult r = denoise(noisy, o);
  const double misfit = (r.x_star.values - noisy.values).squaredNorm();
  if (r.selected_stage + 1 < r.stages.size()) CHECK(misfit <= *o.eta * (1 + 1e-9));
  for (std::size_t k = 0; k < r.selected_stage; ++k) {
    CHECK(r.stages[k].misfit * r.scaling.scale * r.scaling.scale > *o.eta);
  }
}

TEST_CASE("too few samples is an assumption violation") {
  const PointCloud few(testing::circle_points(4));
  CHECK_THROWS_AS(denoise(few), AssumptionViolation);
}
