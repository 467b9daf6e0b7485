#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace testing {

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index t = 0; t < m.size(); ++t) m.data()[t] = g(rng);
  return m;
}

// Points on the unit circle at evenly spaced angles with a phase offset.
inline Eigen::MatrixXd circle_points(Eigen::Index s, double phase = 0.1) {
  Eigen::MatrixXd x(2, s);
  for (Eigen::Index i = 0; i < s; ++i) {
    const double t = phase + 2.0 * 3.14159265358979323846 * static_cast<double>(i) / static_cast<double>(s);
    x(0, i) = std::cos(t);
    x(1, i) = std::sin(t);
  }
  return x;
}

}  // namespace testing
