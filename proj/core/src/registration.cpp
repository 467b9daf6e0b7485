#include "variety/registration.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <random>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "variety/errors.hpp"

namespace variety {

using manifolds::Ambient;
using manifolds::EuclideanPoint;
using manifolds::ProductPoint;
using manifolds::RotationPoint;
using manifolds::TangentVector;

namespace {

struct RegistrationTerms {
  Eigen::MatrixXd q;
  Eigen::VectorXd a;
  Eigen::MatrixXd r;                   // q x s1 polynomial values at y_i
  Eigen::MatrixXd w;                   // n x s1, J(y_i)^T U r_i
  std::vector<Eigen::MatrixXd> curv;   // n x n per point
  bool second_order = false;
};

class RegistrationCache {
 public:
  RegistrationCache(Eigen::MatrixXd x1, VarietyModel model)
      : x1_(std::move(x1)), model_(std::move(model)) {}

  const RegistrationTerms& at(const Eigen::MatrixXd& q, const Eigen::VectorXd& a, bool second_order) {
    const bool same = valid_ && terms_.q == q && terms_.a == a;
    if (!same) {
      terms_.q = q;
      terms_.a = a;
      terms_.curv.clear();
      terms_.second_order = false;
      const Eigen::MatrixXd& u = model_.subspace.basis;
      const Eigen::MatrixXd y = (q * x1_).colwise() + a;
      terms_.r.resize(u.cols(), y.cols());
      terms_.w.resize(y.rows(), y.cols());
      jac_.clear();
      jac_.reserve(static_cast<std::size_t>(y.cols()));
      for (Eigen::Index i = 0; i < y.cols(); ++i) {
        const Eigen::VectorXd phi = features::feature_map(y.col(i), model_.basis);
        Eigen::MatrixXd uj = u.transpose() * features::feature_jacobian(y.col(i), model_.basis);
        terms_.r.col(i) = u.transpose() * phi;
        terms_.w.col(i) = uj.transpose() * terms_.r.col(i);
        jac_.push_back(std::move(uj));
      }
      y_ = y;
      valid_ = true;
    }
    if (second_order && !terms_.second_order) {
      const Eigen::MatrixXd& u = model_.subspace.basis;
      terms_.curv.reserve(static_cast<std::size_t>(y_.cols()));
      for (Eigen::Index i = 0; i < y_.cols(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        const Eigen::VectorXd weights = u * terms_.r.col(i);
        terms_.curv.push_back(features::weighted_hessian(y_.col(i), model_.basis, weights) +
                              jac_[k].transpose() * jac_[k]);
      }
      terms_.second_order = true;
    }
    return terms_;
  }

  const Eigen::MatrixXd& x1() const { return x1_; }

 private:
  Eigen::MatrixXd x1_;
  VarietyModel model_;
  Eigen::MatrixXd y_;
  std::vector<Eigen::MatrixXd> jac_;  // U^T J(y_i), q x n
  RegistrationTerms terms_;
  bool valid_ = false;
};

Eigen::VectorXd random_unit_vector(Eigen::Index n, manifolds::Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(n);
  do {
    for (Eigen::Index k = 0; k < n; ++k) v(k) = gauss(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

manifolds::Rng restart_rng(std::uint64_t seed, int restart, int branch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart), static_cast<std::uint32_t>(branch + 2)};
  return manifolds::Rng(seq);
}

}  // namespace

RigidTransform RigidTransform::identity(Eigen::Index n) {
  return RigidTransform{RotationPoint{Eigen::MatrixXd::Identity(n, n), 1}, Eigen::VectorXd::Zero(n)};
}

Eigen::MatrixXd apply_transform(const RigidTransform& t, const Eigen::MatrixXd& x) {
  if (x.rows() != t.dim() || t.rotation.matrix.rows() != t.dim()) {
    throw InvalidArgument("apply_transform: dimension mismatch");
  }
  return (t.rotation.matrix * x).colwise() + t.translation;
}

PointCloud apply_transform(const RigidTransform& t, const PointCloud& x) {
  return PointCloud(apply_transform(t, x.values), x.name);
}

double registration_cost(const RigidTransform& t, const Eigen::MatrixXd& x1,
                         const VarietyModel& model2) {
  return residual(model2, apply_transform(t, x1));
}

manifolds::TRProblem registration_problem(const Eigen::MatrixXd& x1, const VarietyModel& model2) {
  if (x1.rows() != model2.basis.n) throw InvalidArgument("registration_problem: dimension mismatch");
  auto cache = std::make_shared<RegistrationCache>(x1, model2);

  manifolds::TRProblem problem;
  problem.cost = [cache](const ProductPoint& p) {
    const auto& t = cache->at(manifolds::rotation(p, 0).matrix, manifolds::euclidean(p, 1), false);
    return t.r.squaredNorm();
  };
  problem.euclidean_gradient = [cache](const ProductPoint& p) {
    const auto& t = cache->at(manifolds::rotation(p, 0).matrix, manifolds::euclidean(p, 1), false);
    Eigen::MatrixXd gq = 2.0 * t.w * cache->x1().transpose();
    Eigen::MatrixXd ga = 2.0 * t.w.rowwise().sum();
    return Ambient{std::move(gq), std::move(ga)};
  };
  problem.euclidean_hessian = [cache](const ProductPoint& p, const TangentVector& v) {
    const auto& t = cache->at(manifolds::rotation(p, 0).matrix, manifolds::euclidean(p, 1), true);
    const Eigen::MatrixXd& x1m = cache->x1();
    const Eigen::MatrixXd ydot = (v.parts[0] * x1m).colwise() + v.parts[1].col(0);
    Eigen::MatrixXd wdot(ydot.rows(), ydot.cols());
    for (Eigen::Index i = 0; i < ydot.cols(); ++i) {
      wdot.col(i) = t.curv[static_cast<std::size_t>(i)] * ydot.col(i);
    }
    Eigen::MatrixXd hq = 2.0 * wdot * x1m.transpose();
    Eigen::MatrixXd ha = 2.0 * wdot.rowwise().sum();
    return Ambient{std::move(hq), std::move(ha)};
  };
  return problem;
}

void RegisterOptions::validate() const {
  if (max_restarts < 1) throw InvalidArgument("max_restarts must be >= 1");
}

RegisterResult register_to_variety(const PointCloud& x1, const VarietyModel& model2,
                                   const RegisterOptions& opts) {
  opts.validate();
  x1.validate();
  const Eigen::Index n = x1.dim();
  if (n != model2.basis.n) throw InvalidArgument("register: source dimension differs from model");
  const auto problem = registration_problem(x1.values, model2);

  std::vector<int> branches{1};
  if (opts.both_branches) branches.push_back(-1);

  RegisterResult best;
  bool have_best = false;
  ProductPoint best_point;
  for (int r = 0; r < opts.max_restarts; ++r) {
    bool done = false;
    for (int branch : branches) {
      manifolds::Rng rng = restart_rng(opts.seed, r, branch);
      ProductPoint x0;
      x0.factors = {manifolds::random_rotation(n, branch, rng),
                    EuclideanPoint{random_unit_vector(n, rng)}};
      const manifolds::TRResult res = manifolds::tr_minimize(problem, x0, opts.solver);

      RestartRecord rec;
      rec.restart = r;
      rec.branch = branch;
      rec.residual = res.cost;
      rec.gradient_norm = res.gradient_norm;
      rec.iterations = res.iterations;
      rec.converged = res.converged();
      best.trace.push_back(rec);

      if (!have_best || rec.residual < best.residual) {
        have_best = true;
        best.residual = rec.residual;
        best.restart = r;
        best.branch = branch;
        best.gradient_norm = rec.gradient_norm;
        best.converged = rec.converged;
        best_point = res.point;
      }
      if (opts.residual_threshold >= 0.0 && best.residual <= opts.residual_threshold) {
        done = true;
        break;
      }
    }
    if (done) break;
  }

  best.transform.rotation = manifolds::rotation(best_point, 0);
  best.transform.translation = manifolds::euclidean(best_point, 1).col(0);
  best.residual = registration_cost(best.transform, x1.values, model2);
  return best;
}

PipelineResult register_pipeline(const PointCloud& m1_hat, const PointCloud& m2_hat,
                                 const DenoiseOptions& denoise_opts,
                                 const RegisterOptions& register_opts) {
  if (m1_hat.dim() != m2_hat.dim()) {
    throw InvalidArgument("source and target clouds have different dimensions");
  }
  PipelineResult out;
  out.target = denoise(m2_hat, denoise_opts);
  out.source = denoise(m1_hat, denoise_opts);
  out.target_scaling = out.target.scaling;

  const PointCloud x1_scaled(out.target_scaling.apply(out.source.x_star.values), m1_hat.name);
  RegisterOptions opts = register_opts;
  if (opts.residual_threshold < 0.0) opts.residual_threshold = 10.0 * out.target.residual;
  out.registration = register_to_variety(x1_scaled, out.target.model, opts);
  out.scaled_transform = out.registration.transform;

  const Eigen::MatrixXd& q = out.scaled_transform.rotation.matrix;
  const Eigen::VectorXd& b = out.target_scaling.shift;
  const double c = out.target_scaling.scale;
  out.registration.transform.translation = c * out.scaled_transform.translation + b - q * b;
  return out;
}

RigidTransform procrustes(const PointCloud& x, const PointCloud& y) {
  if (x.values.rows() != y.values.rows() || x.values.cols() != y.values.cols()) {
    throw InvalidArgument("procrustes: clouds must have the same shape");
  }
  const Eigen::Index n = x.dim();
  if (x.size() == 1) {
    RigidTransform t = RigidTransform::identity(n);
    t.translation = y.values.col(0) - x.values.col(0);
    return t;
  }
  const Eigen::VectorXd xc = x.values.rowwise().mean();
  const Eigen::VectorXd yc = y.values.rowwise().mean();
  const Eigen::MatrixXd cross = (y.values.colwise() - yc) * (x.values.colwise() - xc).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::MatrixXd q = svd.matrixU() * svd.matrixV().transpose();
  RigidTransform t;
  t.rotation = RotationPoint{q, q.determinant() < 0.0 ? -1 : 1};
  t.translation = yc - q * xc;
  return t;
}

double procrustes_cost(const RigidTransform& t, const PointCloud& x, const PointCloud& y) {
  return (y.values - apply_transform(t, x.values)).squaredNorm();
}

}  // namespace variety
