#include "variety/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include <Eigen/SVD>

#include "variety/errors.hpp"

namespace variety {

using manifolds::Ambient;
using manifolds::EuclideanPoint;
using manifolds::GrassmannPoint;
using manifolds::ProductPoint;
using manifolds::TangentVector;

namespace {

// Quantities shared by cost, gradient and Hessian at one (X, U).
struct PenalizedTerms {
  Eigen::MatrixXd x;
  Eigen::MatrixXd u;
  Eigen::MatrixXd phi;                 // N x s
  Eigen::MatrixXd r;                   // q x s, r_ij = p_j(x_i)
  std::vector<Eigen::MatrixXd> jac;    // N x n per point
  std::vector<Eigen::MatrixXd> whess;  // Hessian of sum_j r_ij p_j at x_i
  bool second_order = false;
};

class PenalizedCache {
 public:
  explicit PenalizedCache(features::MonomialBasis basis) : basis_(std::move(basis)) {}

  const PenalizedTerms& at(const Eigen::MatrixXd& x, const Eigen::MatrixXd& u, bool second_order) {
    const bool same = valid_ && terms_.x.rows() == x.rows() && terms_.x.cols() == x.cols() &&
                      terms_.u.rows() == u.rows() && terms_.u.cols() == u.cols() &&
                      terms_.x == x && terms_.u == u;
    if (!same) {
      terms_.x = x;
      terms_.u = u;
      terms_.phi = features::feature_matrix(x, basis_);
      terms_.r = u.transpose() * terms_.phi;
      terms_.jac.clear();
      terms_.whess.clear();
      terms_.second_order = false;
      valid_ = true;
    }
    if (terms_.jac.empty()) {
      terms_.jac.reserve(static_cast<std::size_t>(x.cols()));
      for (Eigen::Index i = 0; i < x.cols(); ++i) {
        terms_.jac.push_back(features::feature_jacobian(x.col(i), basis_));
      }
    }
    if (second_order && !terms_.second_order) {
      terms_.whess.reserve(static_cast<std::size_t>(x.cols()));
      for (Eigen::Index i = 0; i < x.cols(); ++i) {
        const Eigen::VectorXd weights = u * terms_.r.col(i);
        terms_.whess.push_back(features::weighted_hessian(x.col(i), basis_, weights));
      }
      terms_.second_order = true;
    }
    return terms_;
  }

  const features::MonomialBasis& basis() const { return basis_; }

 private:
  features::MonomialBasis basis_;
  PenalizedTerms terms_;
  bool valid_ = false;
};

double stage_misfit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& m_hat) {
  return (x - m_hat).squaredNorm();
}

double safe_log(double v) { return std::log(std::max(v, 1e-300)); }

}  // namespace

Eigen::MatrixXd VarietyModel::polynomial_values(const Eigen::MatrixXd& points) const {
  return subspace.basis.transpose() * features::feature_matrix(points, basis);
}

double residual(const VarietyModel& model, const Eigen::MatrixXd& points) {
  if (model.subspace.basis.rows() != model.basis.size()) {
    throw InvalidArgument("residual: subspace rows do not match the basis size");
  }
  return model.polynomial_values(points).squaredNorm();
}

double residual(const VarietyModel& model, const PointCloud& cloud) {
  return residual(model, cloud.values);
}

void check_sample_count(Eigen::Index samples, std::int64_t features, Eigen::Index q) {
  const auto required = features - static_cast<std::int64_t>(q);
  if (samples < required) {
    throw AssumptionViolation("need at least " + std::to_string(required) + " samples (N - q = " +
                                  std::to_string(features) + " - " + std::to_string(q) +
                                  "), got " + std::to_string(samples),
                              static_cast<long>(required));
  }
}

InitialGuess init_guess(const PointCloud& m_hat, int d, int q) {
  m_hat.validate();
  const auto basis = features::build_basis(static_cast<int>(m_hat.dim()), d);
  const Eigen::Index big_n = basis.size();
  if (q < 1 || q > big_n) {
    throw InvalidArgument("q must lie in [1, " + std::to_string(big_n) + "]");
  }
  check_sample_count(m_hat.size(), big_n, q);

  const Eigen::MatrixXd phi = features::feature_matrix(m_hat.values, basis);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(phi, Eigen::ComputeFullU);

  InitialGuess guess;
  guess.x0 = m_hat;
  guess.singular_values = Eigen::VectorXd::Zero(big_n);
  guess.singular_values.head(svd.singularValues().size()) = svd.singularValues();
  guess.u0 = GrassmannPoint{svd.matrixU().rightCols(q)};
  if (q < big_n) {
    const double included = guess.singular_values(big_n - q);
    const double excluded = guess.singular_values(big_n - q - 1);
    const double scale = std::max(1.0, guess.singular_values(0));
    guess.ill_determined = std::abs(excluded - included) <= 1e-12 * scale;
  }
  return guess;
}

Eigen::MatrixXd penalized_gradient_x(const VarietyModel& model, const Eigen::MatrixXd& points,
                                     const Eigen::MatrixXd& m_hat, double lambda) {
  const Eigen::MatrixXd& u = model.subspace.basis;
  Eigen::MatrixXd g = 2.0 * lambda * (points - m_hat);
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    const Eigen::VectorXd phi = features::feature_map(points.col(i), model.basis);
    const Eigen::MatrixXd jac = features::feature_jacobian(points.col(i), model.basis);
    g.col(i) += 2.0 * jac.transpose() * (u * (u.transpose() * phi));
  }
  return g;
}

manifolds::TRProblem penalized_problem(const Eigen::MatrixXd& m_hat,
                                       const features::MonomialBasis& basis, double lambda) {
  if (m_hat.rows() != basis.n) throw InvalidArgument("penalized_problem: dimension mismatch");
  auto cache = std::make_shared<PenalizedCache>(basis);
  auto target = std::make_shared<const Eigen::MatrixXd>(m_hat);

  manifolds::TRProblem problem;
  problem.cost = [cache, target, lambda](const ProductPoint& p) {
    const auto& x = manifolds::euclidean(p, 0);
    const auto& u = manifolds::grassmann(p, 1);
    const auto& t = cache->at(x, u, false);
    return t.r.squaredNorm() + lambda * (x - *target).squaredNorm();
  };
  problem.euclidean_gradient = [cache, target, lambda](const ProductPoint& p) {
    const auto& x = manifolds::euclidean(p, 0);
    const auto& u = manifolds::grassmann(p, 1);
    const auto& t = cache->at(x, u, false);
    Eigen::MatrixXd gx = 2.0 * lambda * (x - *target);
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      gx.col(i) += 2.0 * t.jac[static_cast<std::size_t>(i)].transpose() * (u * t.r.col(i));
    }
    Eigen::MatrixXd gu = 2.0 * t.phi * t.r.transpose();
    return Ambient{std::move(gx), std::move(gu)};
  };
  problem.euclidean_hessian = [cache, lambda](const ProductPoint& p, const TangentVector& v) {
    const auto& x = manifolds::euclidean(p, 0);
    const auto& u = manifolds::grassmann(p, 1);
    const auto& t = cache->at(x, u, true);
    const Eigen::MatrixXd& xdot = v.parts[0];
    const Eigen::MatrixXd& udot = v.parts[1];
    Eigen::MatrixXd hx = 2.0 * lambda * xdot;
    Eigen::MatrixXd hu = 2.0 * t.phi * (t.phi.transpose() * udot);
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      const Eigen::VectorXd phidot = t.jac[k] * xdot.col(i);
      const Eigen::VectorXd rdot = udot.transpose() * t.phi.col(i) + u.transpose() * phidot;
      hx.col(i) += 2.0 * (t.whess[k] * xdot.col(i) +
                          t.jac[k].transpose() * (udot * t.r.col(i) + u * rdot));
      hu += 2.0 * phidot * t.r.col(i).transpose() + 2.0 * t.phi.col(i) * (u.transpose() * phidot).transpose();
    }
    return Ambient{std::move(hx), std::move(hu)};
  };
  return problem;
}

PenalizedSolution solve_penalized(const PointCloud& m_hat, double lambda, const PointCloud& x_init,
                                  const VarietyModel& u_init, const manifolds::TROptions& solver) {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  if (x_init.values.rows() != m_hat.values.rows() || x_init.values.cols() != m_hat.values.cols()) {
    throw InvalidArgument("solve_penalized: initial X shape differs from M_hat");
  }
  const auto problem = penalized_problem(m_hat.values, u_init.basis, lambda);
  ProductPoint x0;
  x0.factors = {EuclideanPoint{x_init.values}, u_init.subspace};

  PenalizedSolution out;
  out.lambda = lambda;
  out.initial_cost = problem.cost(x0);
  out.solver = manifolds::tr_minimize(problem, x0, solver);
  out.x = PointCloud(manifolds::euclidean(out.solver.point, 0), m_hat.name);
  out.model = VarietyModel{GrassmannPoint{manifolds::grassmann(out.solver.point, 1)}, u_init.basis};
  out.residual = residual(out.model, out.x);
  out.misfit = stage_misfit(out.x.values, m_hat.values);
  return out;
}

std::string to_string(StageSelection s) {
  switch (s) {
    case StageSelection::balance:
      return "balance";
    case StageSelection::l_curve:
      return "l_curve";
    case StageSelection::noise_budget:
      return "noise_budget";
  }
  return "unknown";
}

StageSelection stage_selection_from_string(const std::string& s) {
  if (s == "balance") return StageSelection::balance;
  if (s == "l_curve") return StageSelection::l_curve;
  if (s == "noise_budget") return StageSelection::noise_budget;
  throw InvalidArgument("unknown stage selection rule '" + s + "'");
}

void DenoiseOptions::validate() const {
  if (degree < 1) throw InvalidArgument("degree must be >= 1");
  if (q < 1) throw InvalidArgument("q must be >= 1");
  if (!(lambda_initial > 0.0)) throw InvalidArgument("initial lambda must be positive");
  if (!(lambda_multiplier >= 1.0)) throw InvalidArgument("lambda multiplier must be >= 1");
  if (max_stages < 1) throw InvalidArgument("need at least one lambda stage");
  if (!(balance_ratio > 0.0)) throw InvalidArgument("balance ratio must be positive");
  if (eta && !(*eta >= 0.0)) throw InvalidArgument("eta must be non-negative");
}

std::size_t select_stage(const std::vector<StageRecord>& stages, StageSelection rule,
                         double balance_ratio, std::optional<double> eta_scaled) {
  if (stages.empty()) throw InvalidArgument("select_stage: no stages");
  const std::size_t last = stages.size() - 1;
  switch (rule) {
    case StageSelection::balance: {
      std::size_t pick = 0;
      for (std::size_t k = 0; k < stages.size(); ++k) {
        const double res_norm = std::sqrt(stages[k].residual);
        const double mis_norm = std::sqrt(stages[k].misfit);
        if (res_norm <= balance_ratio * mis_norm) pick = k;
      }
      return pick;
    }
    case StageSelection::noise_budget: {
      if (!eta_scaled) throw InvalidArgument("noise_budget selection needs eta");
      for (std::size_t k = 0; k < stages.size(); ++k) {
        if (stages[k].misfit <= *eta_scaled) return k;
      }
      return last;
    }
    case StageSelection::l_curve: {
      if (stages.size() < 3) return last;
      std::size_t pick = last;
      double best = 0.0;
      for (std::size_t k = 1; k + 1 < stages.size(); ++k) {
        // Menger curvature of three consecutive points.
        const double x0 = safe_log(stages[k - 1].lambda), y0 = safe_log(stages[k - 1].misfit);
        const double x1 = safe_log(stages[k].lambda), y1 = safe_log(stages[k].misfit);
        const double x2 = safe_log(stages[k + 1].lambda), y2 = safe_log(stages[k + 1].misfit);
        const double area2 = std::abs((x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0));
        const double a = std::hypot(x1 - x0, y1 - y0);
        const double b = std::hypot(x2 - x1, y2 - y1);
        const double c = std::hypot(x2 - x0, y2 - y0);
        const double denom = a * b * c;
        const double curvature = denom > 0.0 ? 2.0 * area2 / denom : 0.0;
        if (curvature > best) {
          best = curvature;
          pick = k;
        }
      }
      return pick;
    }
  }
  return last;
}

DenoiseResult denoise(const PointCloud& m_hat, const DenoiseOptions& opts) {
  opts.validate();
  m_hat.validate();

  DenoiseResult out;
  PointCloud working;
  if (opts.scaling) {
    auto scaled = scale_to_box(m_hat);
    working = std::move(scaled.cloud);
    out.scaling = std::move(scaled.scaling);
  } else {
    working = m_hat;
    out.scaling = AffineScaling::identity(m_hat.dim());
  }

  InitialGuess guess = init_guess(working, opts.degree, opts.q);
  out.ill_determined = guess.ill_determined;
  const auto basis = features::build_basis(static_cast<int>(working.dim()), opts.degree);

  PointCloud x = guess.x0;
  VarietyModel model{guess.u0, basis};
  std::vector<PenalizedSolution> solutions;
  double lambda = opts.lambda_initial;
  for (int k = 0; k < opts.max_stages; ++k, lambda *= opts.lambda_multiplier) {
    PenalizedSolution sol = solve_penalized(working, lambda, x, model, opts.solver);
    x = sol.x;
    model = sol.model;
    solutions.push_back(std::move(sol));
  }
  if (opts.downward_pass) {
    for (std::size_t k = solutions.size() - 1; k-- > 0;) {
      PenalizedSolution sol =
          solve_penalized(working, solutions[k].lambda, solutions[k + 1].x, solutions[k + 1].model, opts.solver);
      sol.refined = true;
      if (sol.solver.cost < solutions[k].solver.cost) solutions[k] = std::move(sol);
    }
  }
  for (const auto& sol : solutions) {
    StageRecord rec;
    rec.lambda = sol.lambda;
    rec.residual = sol.residual;
    rec.misfit = sol.misfit;
    rec.gradient_norm = sol.solver.gradient_norm;
    rec.iterations = sol.solver.iterations;
    rec.termination = sol.solver.termination;
    rec.refined = sol.refined;
    out.stages.push_back(rec);
  }

  StageSelection rule = opts.eta ? StageSelection::noise_budget : opts.selection;
  std::optional<double> eta_scaled;
  if (opts.eta) eta_scaled = *opts.eta / (out.scaling.scale * out.scaling.scale);
  out.selected_stage = select_stage(out.stages, rule, opts.balance_ratio, eta_scaled);

  const PenalizedSolution& chosen = solutions[out.selected_stage];
  out.x_scaled = chosen.x;
  out.x_star = unscale(chosen.x, out.scaling);
  out.model = chosen.model;
  out.residual = residual(out.model, out.x_scaled);
  out.data_misfit = chosen.misfit;
  out.lambda_final = chosen.lambda;
  out.converged = chosen.solver.converged();
  return out;
}

}  // namespace variety
