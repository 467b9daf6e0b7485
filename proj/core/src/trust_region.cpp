#include "variety/trust_region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "variety/errors.hpp"

namespace variety::manifolds {
namespace {

bool all_finite(const Ambient& a) {
  return std::all_of(a.begin(), a.end(), [](const Eigen::MatrixXd& m) { return m.allFinite(); });
}

double checked_cost(const TRProblem& problem, const ProductPoint& x) {
  const double f = problem.cost(x);
  if (!std::isfinite(f)) throw NonFiniteError("cost is not finite at iterate", x);
  return f;
}

Ambient checked_egrad(const TRProblem& problem, const ProductPoint& x) {
  Ambient g = problem.euclidean_gradient(x);
  if (!all_finite(g)) throw NonFiniteError("gradient is not finite at iterate", x);
  return g;
}

// Hessian operator frozen at one outer iterate.
class HessianAt {
 public:
  HessianAt(const TRProblem& problem, const ProductPoint& x, Ambient egrad, TangentVector rgrad)
      : problem_(problem), x_(x), egrad_(std::move(egrad)), rgrad_(std::move(rgrad)),
        fd_step_(1e-7 * (1.0 + ambient_norm(x))) {}

  TangentVector operator()(const TangentVector& v) {
    ++products_;
    if (problem_.euclidean_hessian) {
      return ehess_to_rhess(x_, egrad_, problem_.euclidean_hessian(x_, v), v);
    }
    const double vn = norm(v);
    if (vn == 0.0) return zero_tangent(x_);
    const double t = fd_step_ / vn;
    const ProductPoint moved = retract(x_, scaled(t, v));
    const TangentVector g_moved = project_tangent(moved, checked_egrad(problem_, moved));
    // Transport back by projection onto T_x.
    TangentVector diff = lincomb(1.0 / t, g_moved, -1.0 / t, rgrad_);
    return project_tangent(x_, diff.parts);
  }

  int products() const noexcept { return products_; }

 private:
  const TRProblem& problem_;
  const ProductPoint& x_;
  Ambient egrad_;
  TangentVector rgrad_;
  double fd_step_;
  int products_ = 0;
};

enum class TcgStop { negative_curvature, exceeded_radius, residual_small, max_inner };

struct TcgOutput {
  TangentVector eta;
  TangentVector h_eta;
  TcgStop stop;
};

// Steihaug-Toint truncated CG on the model g'eta + 0.5 eta'H eta, ||eta|| <= radius.
TcgOutput truncated_cg(const ProductPoint& x, const TangentVector& grad, HessianAt& hess,
                       double radius, int max_inner, double kappa, double theta,
                       const TangentVector* start) {
  TangentVector eta = start ? *start : zero_tangent(x);
  TangentVector h_eta = start ? hess(eta) : zero_tangent(x);
  TangentVector r = start ? lincomb(1.0, grad, 1.0, h_eta) : grad;

  double e_pe = inner(eta, eta);
  double r_r = inner(r, r);
  const double norm_r0 = std::sqrt(r_r);
  double z_r = r_r;
  double d_pd = z_r;
  TangentVector delta = scaled(-1.0, r);
  double e_pd = inner(eta, delta);

  for (int j = 0; j < max_inner; ++j) {
    const TangentVector h_delta = hess(delta);
    const double d_hd = inner(delta, h_delta);
    const double alpha = z_r / d_hd;
    const double e_pe_new = e_pe + 2.0 * alpha * e_pd + alpha * alpha * d_pd;

    if (d_hd <= 0.0 || e_pe_new >= radius * radius) {
      const double tau = (-e_pd + std::sqrt(e_pd * e_pd + d_pd * (radius * radius - e_pe))) / d_pd;
      axpy(tau, delta, eta);
      axpy(tau, h_delta, h_eta);
      return {std::move(eta), std::move(h_eta),
              d_hd <= 0.0 ? TcgStop::negative_curvature : TcgStop::exceeded_radius};
    }

    e_pe = e_pe_new;
    axpy(alpha, delta, eta);
    axpy(alpha, h_delta, h_eta);
    axpy(alpha, h_delta, r);
    r = project_tangent(x, r.parts);

    r_r = inner(r, r);
    const double norm_r = std::sqrt(r_r);
    if (norm_r <= norm_r0 * std::min(std::pow(norm_r0, theta), kappa)) {
      return {std::move(eta), std::move(h_eta), TcgStop::residual_small};
    }

    const double zold_rold = z_r;
    z_r = r_r;
    const double beta = z_r / zold_rold;
    delta = lincomb(-1.0, r, beta, delta);
    delta = project_tangent(x, delta.parts);
    e_pd = beta * (e_pd + alpha * d_pd);
    d_pd = z_r + beta * beta * d_pd;
  }
  return {std::move(eta), std::move(h_eta), TcgStop::max_inner};
}

}  // namespace

std::string to_string(Termination t) {
  switch (t) {
    case Termination::gradient_tolerance:
      return "gradient_tolerance";
    case Termination::max_iterations:
      return "max_iterations";
    case Termination::radius_collapse:
      return "radius_collapse";
  }
  return "unknown";
}

TangentVector riemannian_gradient(const TRProblem& problem, const ProductPoint& x) {
  return project_tangent(x, checked_egrad(problem, x));
}

TangentVector riemannian_hessian(const TRProblem& problem, const ProductPoint& x,
                                 const TangentVector& grad, const TangentVector& v) {
  Ambient egrad = checked_egrad(problem, x);
  HessianAt hess(problem, x, std::move(egrad), grad);
  return hess(v);
}

TRResult tr_minimize(const TRProblem& problem, const ProductPoint& x0, const TROptions& opts) {
  if (!problem.cost || !problem.euclidean_gradient) {
    throw InvalidArgument("TRProblem needs cost and euclidean_gradient callbacks");
  }
  const auto dim = static_cast<double>(std::max<std::size_t>(manifold_dimension(x0), 1));
  const double radius0 = opts.initial_radius > 0.0 ? opts.initial_radius : 0.1 * std::sqrt(dim);
  const double radius_max = opts.max_radius > 0.0 ? opts.max_radius : 10.0 * radius0;
  const int max_inner =
      opts.max_inner_iterations > 0 ? opts.max_inner_iterations : static_cast<int>(dim);
  constexpr double rho_regularization = 1e3;

  Rng rng(opts.seed);

  TRResult result;
  ProductPoint x = x0;
  double f = checked_cost(problem, x);
  Ambient egrad = checked_egrad(problem, x);
  TangentVector grad = project_tangent(x, egrad);
  double grad_norm = norm(grad);
  double radius = radius0;
  result.cost_trace.push_back(f);

  int k = 0;
  for (; k < opts.max_iterations; ++k) {
    if (grad_norm <= opts.gradient_tolerance) {
      result.termination = Termination::gradient_tolerance;
      break;
    }

    HessianAt hess(problem, x, egrad, grad);
    TangentVector start;
    const bool use_start = opts.random_tcg_start && k == 0;
    if (use_start) start = scaled(1e-6 * radius, random_tangent(x, rng));
    TcgOutput step = truncated_cg(x, grad, hess, radius, max_inner, opts.tcg_kappa, opts.tcg_theta,
                                  use_start ? &start : nullptr);
    result.hessian_products += hess.products();

    const ProductPoint proposal = retract(x, step.eta);
    if (opts.check_invariants && invariant_violation(proposal) > 1e-10) {
      throw std::logic_error("retraction left the manifold");
    }
    const double f_prop = checked_cost(problem, proposal);

    const double model_decrease = -(inner(grad, step.eta) + 0.5 * inner(step.h_eta, step.eta));
    const double reg = std::max(1.0, std::abs(f)) * std::numeric_limits<double>::epsilon() *
                       rho_regularization;
    const double rho_num = f - f_prop + reg;
    const double rho_den = model_decrease + reg;
    const double rho = rho_den > 0.0 ? rho_num / rho_den : -1.0;

    const bool on_boundary =
        step.stop == TcgStop::negative_curvature || step.stop == TcgStop::exceeded_radius;
    if (rho < 0.25) {
      radius *= 0.25;
    } else if (rho > 0.75 && on_boundary) {
      radius = std::min(2.0 * radius, radius_max);
    }

    if (rho > opts.acceptance_ratio && f_prop <= f) {
      x = proposal;
      f = f_prop;
      egrad = checked_egrad(problem, x);
      grad = project_tangent(x, egrad);
      grad_norm = norm(grad);
      result.cost_trace.push_back(f);
    }

    if (radius < radius0 * 1e-14 || radius < std::numeric_limits<double>::min()) {
      result.termination = grad_norm <= opts.gradient_tolerance ? Termination::gradient_tolerance
                                                                : Termination::radius_collapse;
      ++k;
      break;
    }
  }
  if (k == opts.max_iterations && grad_norm <= opts.gradient_tolerance) {
    result.termination = Termination::gradient_tolerance;
  }

  result.point = std::move(x);
  result.cost = f;
  result.gradient_norm = grad_norm;
  result.iterations = k;
  return result;
}

double check_gradient(const TRProblem& problem, const ProductPoint& x, std::uint64_t seed,
                      int directions, double step) {
  Rng rng(seed);
  const TangentVector grad = riemannian_gradient(problem, x);
  double worst = 0.0;
  for (int i = 0; i < std::max(directions, 1); ++i) {
    const TangentVector dir = random_tangent(x, rng);
    const double fp = problem.cost(retract(x, scaled(step, dir)));
    const double fm = problem.cost(retract(x, scaled(-step, dir)));
    const double fd = (fp - fm) / (2.0 * step);
    const double analytic = inner(grad, dir);
    worst = std::max(worst, std::abs(fd - analytic) / (1.0 + std::abs(analytic)));
  }
  return worst;
}

}  // namespace variety::manifolds
