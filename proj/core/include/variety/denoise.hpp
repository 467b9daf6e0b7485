#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "variety/features.hpp"
#include "variety/manifolds.hpp"
#include "variety/point_cloud.hpp"
#include "variety/trust_region.hpp"

namespace variety {

// q polynomials of degree <= d; column j of the subspace basis holds the
// coefficients of p_j in the monomial basis. Only the span matters.
struct VarietyModel {
  manifolds::GrassmannPoint subspace;
  features::MonomialBasis basis;

  Eigen::Index q() const noexcept { return subspace.basis.cols(); }

  // q x s matrix of p_j(x_i).
  Eigen::MatrixXd polynomial_values(const Eigen::MatrixXd& points) const;
};

// ||U^T Phi_d(X)||_F^2 = sum_i sum_j p_j(x_i)^2.
double residual(const VarietyModel& model, const Eigen::MatrixXd& points);
double residual(const VarietyModel& model, const PointCloud& cloud);

// Throws AssumptionViolation unless s >= N - q.
void check_sample_count(Eigen::Index samples, std::int64_t features, Eigen::Index q);

struct InitialGuess {
  PointCloud x0;
  manifolds::GrassmannPoint u0;
  // Singular values of Phi_d(M_hat), descending, padded with zeros to N.
  Eigen::VectorXd singular_values;
  // sigma_q and sigma_{q+1} (counted from the smallest) tie within 1e-12.
  bool ill_determined = false;
};

// X0 = M_hat; U0 spans the left singular vectors of Phi_d(M_hat) for its
// q smallest singular values.
InitialGuess init_guess(const PointCloud& m_hat, int d, int q);

// f(X, U) = ||U^T Phi_d(X)||^2 + lambda ||X - M_hat||^2 on
// R^{n x s} x Grass(N, q). Factor 0 is X, factor 1 is U. The problem
// carries an exact Hessian-vector product.
manifolds::TRProblem penalized_problem(const Eigen::MatrixXd& m_hat,
                                       const features::MonomialBasis& basis, double lambda);

// Gradient of the penalized cost with respect to X only (n x s).
Eigen::MatrixXd penalized_gradient_x(const VarietyModel& model, const Eigen::MatrixXd& points,
                                     const Eigen::MatrixXd& m_hat, double lambda);

struct PenalizedSolution {
  PointCloud x;
  VarietyModel model;
  double lambda = 0.0;
  double residual = 0.0;
  // ||X - M_hat||_F^2
  double misfit = 0.0;
  double initial_cost = 0.0;
  manifolds::TRResult solver;
  // Came from the downward pass rather than the upward continuation.
  bool refined = false;
};

PenalizedSolution solve_penalized(const PointCloud& m_hat, double lambda, const PointCloud& x_init,
                                  const VarietyModel& u_init,
                                  const manifolds::TROptions& solver = {});

enum class StageSelection {
  // Last stage whose ||U^T Phi(X)||_F stays below balance_ratio * ||X - M_hat||_F.
  balance,
  // Corner of the (log lambda, log misfit) curve.
  l_curve,
  // Smallest lambda whose misfit (original units) is within eta.
  noise_budget,
};

std::string to_string(StageSelection s);
StageSelection stage_selection_from_string(const std::string& s);

struct DenoiseOptions {
  int degree = 2;
  int q = 1;
  double lambda_initial = 1e-6;
  double lambda_multiplier = 10.0;
  int max_stages = 8;
  manifolds::TROptions solver;
  bool scaling = true;
  StageSelection selection = StageSelection::balance;
  double balance_ratio = 1e-4;
  // Noise budget on ||X - M_hat||_F^2 in original units. Setting it
  // switches the selection to noise_budget.
  std::optional<double> eta;
  // After the increasing-lambda sweep, re-solve each stage warm-started
  // from the next larger lambda and keep whichever point has the lower
  // penalized cost.
  bool downward_pass = true;

  void validate() const;
};

struct StageRecord {
  double lambda = 0.0;
  double residual = 0.0;
  double misfit = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  manifolds::Termination termination = manifolds::Termination::max_iterations;
  bool refined = false;
};

struct DenoiseResult {
  // Denoised cloud in the caller's coordinates.
  PointCloud x_star;
  // Same cloud in the solver's (scaled) coordinates; the model lives here.
  PointCloud x_scaled;
  VarietyModel model;
  AffineScaling scaling;
  // Scaled coordinates.
  double residual = 0.0;
  double data_misfit = 0.0;
  double lambda_final = 0.0;
  std::size_t selected_stage = 0;
  std::vector<StageRecord> stages;
  bool converged = true;
  bool ill_determined = false;
};

DenoiseResult denoise(const PointCloud& m_hat, const DenoiseOptions& opts = {});

// Index of the stage chosen by the given rule.
std::size_t select_stage(const std::vector<StageRecord>& stages, StageSelection rule,
                         double balance_ratio, std::optional<double> eta_scaled);

}  // namespace variety
