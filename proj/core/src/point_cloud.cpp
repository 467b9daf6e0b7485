#include "variety/point_cloud.hpp"

#include <cmath>
#include <utility>

#include "variety/errors.hpp"

namespace variety {

PointCloud::PointCloud(Eigen::MatrixXd v, std::string label)
    : values(std::move(v)), name(std::move(label)) {}

void PointCloud::validate() const {
  if (values.rows() < 1 || values.cols() < 1) {
    throw InvalidArgument("point cloud must have at least one dimension and one sample");
  }
  if (!values.allFinite()) {
    throw InvalidArgument("point cloud contains non-finite entries");
  }
}

Eigen::MatrixXd AffineScaling::apply(const Eigen::MatrixXd& x) const {
  if (x.rows() != shift.size()) {
    throw InvalidArgument("scaling dimension does not match cloud");
  }
  return (x.colwise() - shift) / scale;
}

Eigen::MatrixXd AffineScaling::invert(const Eigen::MatrixXd& x) const {
  if (x.rows() != shift.size()) {
    throw InvalidArgument("scaling dimension does not match cloud");
  }
  return (x * scale).colwise() + shift;
}

AffineScaling AffineScaling::identity(Eigen::Index n) {
  return AffineScaling{Eigen::VectorXd::Zero(n), 1.0};
}

ScaledCloud scale_to_box(const PointCloud& cloud) {
  cloud.validate();
  AffineScaling scaling;
  scaling.shift = cloud.values.rowwise().mean();
  const Eigen::MatrixXd centered = cloud.values.colwise() - scaling.shift;
  const double c = centered.cwiseAbs().maxCoeff();
  scaling.scale = c > 0.0 ? c : 1.0;
  return ScaledCloud{PointCloud(centered / scaling.scale, cloud.name), scaling};
}

PointCloud unscale(const PointCloud& scaled, const AffineScaling& scaling) {
  return PointCloud(scaling.invert(scaled.values), scaled.name);
}

double rmse(const PointCloud& truth, const PointCloud& estimate) {
  if (truth.values.rows() != estimate.values.rows() ||
      truth.values.cols() != estimate.values.cols()) {
    throw InvalidArgument("rmse: shape mismatch");
  }
  const double count = static_cast<double>(truth.values.size());
  return (truth.values - estimate.values).norm() / std::sqrt(count);
}

}  // namespace variety
