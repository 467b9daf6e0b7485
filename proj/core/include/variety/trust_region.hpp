#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "variety/manifolds.hpp"

namespace variety::manifolds {

// Smooth cost on a product manifold. The Euclidean gradient and Hessian
// are taken in the embedding space; the solver converts them.
struct TRProblem {
  std::function<double(const ProductPoint&)> cost;
  std::function<Ambient(const ProductPoint&)> euclidean_gradient;
  // Optional. When empty, Hessian-vector products are forward differences
  // of the Riemannian gradient.
  std::function<Ambient(const ProductPoint&, const TangentVector&)> euclidean_hessian;
};

struct TROptions {
  double gradient_tolerance = 1e-6;
  int max_iterations = 500;
  // <= 0 selects 0.1 * sqrt(manifold dimension).
  double initial_radius = 0.0;
  // <= 0 selects 10 * initial radius.
  double max_radius = 0.0;
  // <= 0 selects the manifold dimension.
  int max_inner_iterations = 0;
  double acceptance_ratio = 0.1;
  // tCG stops when ||r|| <= ||r0|| * min(||r0||^theta, kappa).
  double tcg_kappa = 0.1;
  double tcg_theta = 1.0;
  // Start tCG from a small random tangent instead of zero on the first
  // outer iteration. Helps escape exact saddle points.
  bool random_tcg_start = false;
  std::uint64_t seed = 0;
  // Check orthonormality and determinant branch after every retraction.
  bool check_invariants = false;
};

enum class Termination {
  gradient_tolerance,
  max_iterations,
  radius_collapse,
};

std::string to_string(Termination t);

struct TRResult {
  ProductPoint point;
  double cost = 0.0;
  double gradient_norm = 0.0;
  // Cost at x0 followed by the cost after every accepted step.
  std::vector<double> cost_trace;
  int iterations = 0;
  int hessian_products = 0;
  Termination termination = Termination::max_iterations;

  bool converged() const noexcept { return termination == Termination::gradient_tolerance; }
};

// Thrown when the cost or gradient evaluates to NaN/Inf.
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& what, ProductPoint iterate)
      : std::runtime_error(what), iterate_(std::move(iterate)) {}
  const ProductPoint& iterate() const noexcept { return iterate_; }

 private:
  ProductPoint iterate_;
};

TangentVector riemannian_gradient(const TRProblem& problem, const ProductPoint& x);

// Riemannian Hessian-vector product (exact when the problem provides a
// Euclidean Hessian, finite differences otherwise).
TangentVector riemannian_hessian(const TRProblem& problem, const ProductPoint& x,
                                 const TangentVector& grad, const TangentVector& v);

// Riemannian trust region with a Steihaug-Toint truncated CG inner solver.
TRResult tr_minimize(const TRProblem& problem, const ProductPoint& x0, const TROptions& opts = {});

// Max over random unit tangents of |FD - <grad, dir>| / (1 + |<grad, dir>|)
// with central differences along the retraction.
double check_gradient(const TRProblem& problem, const ProductPoint& x, std::uint64_t seed = 0,
                      int directions = 10, double step = 1e-6);

}  // namespace variety::manifolds
