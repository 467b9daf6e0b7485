#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "variety/denoise.hpp"
#include "variety/manifolds.hpp"
#include "variety/point_cloud.hpp"
#include "variety/trust_region.hpp"

namespace variety {

// x -> Q x + a.
struct RigidTransform {
  manifolds::RotationPoint rotation;
  Eigen::VectorXd translation;

  static RigidTransform identity(Eigen::Index n);
  Eigen::Index dim() const noexcept { return translation.size(); }
};

PointCloud apply_transform(const RigidTransform& t, const PointCloud& x);
Eigen::MatrixXd apply_transform(const RigidTransform& t, const Eigen::MatrixXd& x);

// ||U2^T Phi_d(Q X1 + a 1^T)||_F^2, i.e. residual(model2, apply_transform(t, X1)).
double registration_cost(const RigidTransform& t, const Eigen::MatrixXd& x1,
                         const VarietyModel& model2);

// Cost over SO(n) (or the det = -1 component) x R^n. Factor 0 is Q,
// factor 1 is a (n x 1). Carries an exact Hessian-vector product.
manifolds::TRProblem registration_problem(const Eigen::MatrixXd& x1, const VarietyModel& model2);

struct RegisterOptions {
  int max_restarts = 5;
  // Stop restarting once the residual drops to this value. Negative means
  // "derive from the target fit" in register_pipeline and "never" in
  // register_to_variety.
  double residual_threshold = -1.0;
  bool both_branches = true;
  manifolds::TROptions solver;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RestartRecord {
  int restart = 0;
  int branch = 1;
  double residual = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct RegisterResult {
  RigidTransform transform;
  double residual = 0.0;
  int restart = 0;
  int branch = 1;
  double gradient_norm = 0.0;
  bool converged = false;
  // Every (restart, branch) attempt in the order it ran.
  std::vector<RestartRecord> trace;
};

// Aligns X1 onto the variety of model2. X1 must be expressed in the
// coordinates model2 was fitted in. Restart r uses Q0 drawn from the
// branch's component and a0 uniform on the unit sphere; both come from
// a generator seeded by (seed, r, branch).
RegisterResult register_to_variety(const PointCloud& x1, const VarietyModel& model2,
                                   const RegisterOptions& opts = {});

struct PipelineResult {
  RegisterResult registration;  // transform mapped back to original units
  // Transform in the target's scaled coordinates.
  RigidTransform scaled_transform;
  AffineScaling target_scaling;
  DenoiseResult source;
  DenoiseResult target;
};

// Denoise the target, denoise the source, then register the denoised
// source onto the target variety in the target's scaled frame. The
// reported transform maps original source coordinates to original target
// coordinates: a = c * a_scaled + b - Q b.
PipelineResult register_pipeline(const PointCloud& m1_hat, const PointCloud& m2_hat,
                                 const DenoiseOptions& denoise_opts,
                                 const RegisterOptions& register_opts);

// Closed-form minimizer of sum_k ||y_k - Q x_k - a||^2 over O(n) x R^n
// for column-wise correspondences. With a single column the rotation is
// the identity and a = y_1 - x_1.
RigidTransform procrustes(const PointCloud& x, const PointCloud& y);

double procrustes_cost(const RigidTransform& t, const PointCloud& x, const PointCloud& y);

}  // namespace variety
