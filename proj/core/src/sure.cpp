#include "variety/sure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "variety/errors.hpp"
#include "variety/trust_region.hpp"

namespace variety {

Eigen::MatrixXd BlockDiagonalHessian::apply(const Eigen::MatrixXd& direction) const {
  if (direction.cols() != static_cast<Eigen::Index>(blocks.size())) {
    throw InvalidArgument("xx_hessian: direction has the wrong number of columns");
  }
  Eigen::MatrixXd out(direction.rows(), direction.cols());
  for (Eigen::Index i = 0; i < direction.cols(); ++i) {
    out.col(i) = blocks[static_cast<std::size_t>(i)] * direction.col(i);
  }
  return out;
}

Eigen::MatrixXd BlockDiagonalHessian::dense() const {
  if (blocks.empty()) return {};
  const Eigen::Index n = blocks.front().rows();
  const auto s = static_cast<Eigen::Index>(blocks.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n * s, n * s);
  for (Eigen::Index i = 0; i < s; ++i) h.block(i * n, i * n, n, n) = blocks[static_cast<std::size_t>(i)];
  return h;
}

BlockDiagonalHessian xx_hessian(const VarietyModel& model, const Eigen::MatrixXd& points,
                                double lambda) {
  if (points.rows() != model.basis.n) throw InvalidArgument("xx_hessian: dimension mismatch");
  const Eigen::MatrixXd& u = model.subspace.basis;
  BlockDiagonalHessian h;
  h.blocks.reserve(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    const Eigen::VectorXd phi = features::feature_map(points.col(i), model.basis);
    const Eigen::MatrixXd jac = features::feature_jacobian(points.col(i), model.basis);
    const Eigen::MatrixXd uj = u.transpose() * jac;  // q x n
    const Eigen::VectorXd weights = u * (u.transpose() * phi);
    Eigen::MatrixXd block = 2.0 * uj.transpose() * uj +
                            2.0 * features::weighted_hessian(points.col(i), model.basis, weights);
    block.diagonal().array() += 2.0 * lambda;
    h.blocks.push_back(0.5 * (block + block.transpose()).eval());
  }
  return h;
}

DivergenceResult divergence(const VarietyModel& model, const Eigen::MatrixXd& points, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("divergence: lambda must be positive");
  const BlockDiagonalHessian h = xx_hessian(model, points, lambda);
  DivergenceResult out;
  out.min_eigenvalue = std::numeric_limits<double>::infinity();
  out.max_eigenvalue = 0.0;
  double trace_inv = 0.0;
  for (const auto& block : h.blocks) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    if (!(ev.minCoeff() > 0.0)) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.3e", ev.minCoeff());
      throw NotIsolatedMinimizer(
          std::string("not an isolated minimizer at this tolerance: X-block Hessian has eigenvalue ") + buf);
    }
    out.min_eigenvalue = std::min(out.min_eigenvalue, ev.minCoeff());
    out.max_eigenvalue = std::max(out.max_eigenvalue, ev.maxCoeff());
    trace_inv += ev.cwiseInverse().sum();
  }
  out.value = 2.0 * lambda * trace_inv;
  out.condition_number = out.max_eigenvalue / out.min_eigenvalue;
  return out;
}

std::optional<double> full_hessian_condition(const VarietyModel& model,
                                             const Eigen::MatrixXd& points,
                                             const Eigen::MatrixXd& m_hat, double lambda,
                                             std::size_t max_dimension) {
  using manifolds::TangentVector;
  const Eigen::MatrixXd& u = model.subspace.basis;
  const Eigen::Index big_n = u.rows();
  const Eigen::Index q = u.cols();
  const Eigen::Index nx = points.size();
  const Eigen::Index dim = nx + q * (big_n - q);
  if (static_cast<std::size_t>(dim) > max_dimension) return std::nullopt;

  manifolds::ProductPoint x;
  x.factors = {manifolds::EuclideanPoint{points}, model.subspace};
  const auto problem = penalized_problem(m_hat, model.basis, lambda);
  const TangentVector grad = manifolds::riemannian_gradient(problem, x);

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(u);
  const Eigen::MatrixXd full_q = qr.householderQ() * Eigen::MatrixXd::Identity(big_n, big_n);
  const Eigen::MatrixXd u_perp = full_q.rightCols(big_n - q);

  std::vector<TangentVector> basis_vectors;
  basis_vectors.reserve(static_cast<std::size_t>(dim));
  for (Eigen::Index k = 0; k < nx; ++k) {
    TangentVector e{manifolds::zeros_like(x)};
    e.parts[0].data()[k] = 1.0;
    basis_vectors.push_back(std::move(e));
  }
  for (Eigen::Index b = 0; b < q; ++b) {
    for (Eigen::Index a = 0; a < big_n - q; ++a) {
      TangentVector e{manifolds::zeros_like(x)};
      e.parts[1].col(b) = u_perp.col(a);
      basis_vectors.push_back(std::move(e));
    }
  }

  Eigen::MatrixXd hess(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    const TangentVector hj =
        manifolds::riemannian_hessian(problem, x, grad, basis_vectors[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < dim; ++i) {
      hess(i, j) = manifolds::inner(basis_vectors[static_cast<std::size_t>(i)], hj);
    }
  }
  hess = 0.5 * (hess + hess.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = eig.eigenvalues().cwiseAbs();
  return ev.maxCoeff() / ev.minCoeff();
}

SureReport sure_estimate(const PointCloud& m_hat, const PointCloud& x_star, double divergence_value,
                         double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("sure_estimate: sigma must be positive");
  if (m_hat.values.rows() != x_star.values.rows() || m_hat.values.cols() != x_star.values.cols()) {
    throw InvalidArgument("sure_estimate: shape mismatch");
  }
  const double ns = static_cast<double>(m_hat.values.size());
  SureReport rep;
  rep.sigma = sigma;
  rep.divergence = divergence_value;
  rep.r_hat = (m_hat.values - x_star.values).squaredNorm() - ns * sigma * sigma +
              2.0 * sigma * sigma * divergence_value;
  rep.clamped = rep.r_hat < 0.0;
  rep.sure_rmse = std::sqrt(std::max(rep.r_hat, 0.0) / ns);
  rep.divergence_out_of_range = divergence_value < 0.0 || divergence_value > ns * (1.0 + 1e-6);
  return rep;
}

SureReport sure_for_result(const PointCloud& m_hat, const DenoiseResult& result, double sigma,
                           bool full_hessian_diagnostics) {
  const double c = result.scaling.scale;
  const PointCloud m_scaled(result.scaling.apply(m_hat.values));
  const DivergenceResult div = divergence(result.model, result.x_scaled.values, result.lambda_final);
  SureReport rep = sure_estimate(m_scaled, result.x_scaled, div.value, sigma / c);
  rep.r_hat *= c * c;
  rep.sure_rmse *= c;
  rep.sigma = sigma;
  rep.hessian_condition = div.condition_number;
  if (full_hessian_diagnostics) {
    rep.full_hessian_condition = full_hessian_condition(result.model, result.x_scaled.values,
                                                        m_scaled.values, result.lambda_final);
  }
  return rep;
}

std::vector<DegreeSure> sure_by_degree(const PointCloud& m_hat, double sigma,
                                       const DenoiseOptions& base, int min_degree, int max_degree) {
  std::vector<DegreeSure> out;
  for (int d = min_degree; d <= max_degree; ++d) {
    DenoiseOptions opts = base;
    opts.degree = d;
    const auto big_n = features::dimension(static_cast<int>(m_hat.dim()), d);
    if (m_hat.size() < big_n - opts.q) continue;
    const DenoiseResult res = denoise(m_hat, opts);
    DegreeSure entry{d, {}, res.residual, {}};
    try {
      entry.report = sure_for_result(m_hat, res, sigma);
    } catch (const NotIsolatedMinimizer& e) {
      entry.failure = e.what();
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace variety
