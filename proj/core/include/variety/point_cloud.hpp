#pragma once

#include <string>

#include <Eigen/Core>

namespace variety {

// n x s matrix of samples; column i is one point in R^n.
struct PointCloud {
  Eigen::MatrixXd values;
  std::string name;

  PointCloud() = default;
  explicit PointCloud(Eigen::MatrixXd v, std::string label = {});

  Eigen::Index dim() const noexcept { return values.rows(); }
  Eigen::Index size() const noexcept { return values.cols(); }

  // Throws InvalidArgument unless s >= 1 and every entry is finite.
  void validate() const;
};

// x -> (x - shift) / scale, applied column-wise.
struct AffineScaling {
  Eigen::VectorXd shift;
  double scale = 1.0;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& x) const;

  static AffineScaling identity(Eigen::Index n);
};

struct ScaledCloud {
  PointCloud cloud;
  AffineScaling scaling;
};

// Subtract the centroid, then divide by the largest absolute centered
// coordinate. A cloud of identical points gets scale 1.
ScaledCloud scale_to_box(const PointCloud& cloud);
PointCloud unscale(const PointCloud& scaled, const AffineScaling& scaling);

// ||M - X||_F / sqrt(n s).
double rmse(const PointCloud& truth, const PointCloud& estimate);

}  // namespace variety
