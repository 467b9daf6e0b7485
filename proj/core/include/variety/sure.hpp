#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "variety/denoise.hpp"
#include "variety/point_cloud.hpp"

namespace variety {

// The X-block of the penalized cost's Euclidean Hessian. Columns of X
// decouple, so the operator on R^{n*s} is block diagonal with one n x n
// block per point:
//   2 J_i^T U U^T J_i + 2 sum_j p_j(x_i) Hess p_j(x_i) + 2 lambda I.
struct BlockDiagonalHessian {
  std::vector<Eigen::MatrixXd> blocks;

  // Applies the operator to an n x s direction.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& direction) const;
  Eigen::MatrixXd dense() const;
};

BlockDiagonalHessian xx_hessian(const VarietyModel& model, const Eigen::MatrixXd& points,
                                double lambda);

struct DivergenceResult {
  // 2 lambda trace(H^{-1}).
  double value = 0.0;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double condition_number = 0.0;
};

class NotIsolatedMinimizer : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sum_ij dX*_ij / dM_hat_ij = 2 lambda trace(H^{-1}), one symmetric
// eigensolve per block. Throws NotIsolatedMinimizer when a block is not
// positive definite.
DivergenceResult divergence(const VarietyModel& model, const Eigen::MatrixXd& points, double lambda);

// Condition number of the full Riemannian Hessian on R^{n x s} x Grass(N,q)
// at (X, U), assembled in an orthonormal tangent basis. Empty when the
// manifold dimension exceeds max_dimension.
std::optional<double> full_hessian_condition(const VarietyModel& model,
                                             const Eigen::MatrixXd& points,
                                             const Eigen::MatrixXd& m_hat, double lambda,
                                             std::size_t max_dimension = 1500);

struct SureReport {
  // Unbiased estimate of ||M - X*||_F^2.
  double r_hat = 0.0;
  // sqrt(max(r_hat, 0) / (n s)).
  double sure_rmse = 0.0;
  double divergence = 0.0;
  double sigma = 0.0;
  bool clamped = false;
  // Divergence outside [0, n s (1 + 1e-6)].
  bool divergence_out_of_range = false;
  double hessian_condition = 0.0;
  std::optional<double> full_hessian_condition;
};

// R_hat = ||M_hat - X*||^2 - n s sigma^2 + 2 sigma^2 divergence.
SureReport sure_estimate(const PointCloud& m_hat, const PointCloud& x_star, double divergence,
                         double sigma);

// SURE for a denoise() result, in the caller's units. sigma is the noise
// level of m_hat in those units; the estimate is formed in the solver's
// scaled coordinates and mapped back.
SureReport sure_for_result(const PointCloud& m_hat, const DenoiseResult& result, double sigma,
                           bool full_hessian_diagnostics = false);

struct DegreeSure {
  int degree = 0;
  SureReport report;
  double residual = 0.0;
  // Set when the divergence could not be formed at this degree; report
  // is then left at its defaults.
  std::string failure;
};

// Runs denoise for each degree in [min_degree, max_degree] and reports
// SURE per degree. Degrees that violate the sample-count assumption are
// skipped; degrees whose solution is not an isolated minimizer are kept
// with a failure message.
std::vector<DegreeSure> sure_by_degree(const PointCloud& m_hat, double sigma,
                                       const DenoiseOptions& base, int min_degree = 1,
                                       int max_degree = 5);

}  // namespace variety
