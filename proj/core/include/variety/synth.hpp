#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "variety/manifolds.hpp"
#include "variety/point_cloud.hpp"

namespace variety::synth {

enum class Generator { circle, union_two_subspaces, parabola, quadratic_surface_3d };
enum class Overlap { full, partial, none };

std::string to_string(Generator g);
std::string to_string(Overlap o);
// Throw InvalidArgument on unknown names.
Generator generator_from_string(const std::string& name);
Overlap overlap_from_string(const std::string& name);

// Range of the first curve/surface parameter. For the circle it is the
// angle, for the two lines the signed distance from the origin, for the
// graphs the x coordinate. The surface's y coordinate always spans [-2, 2].
struct ParameterRange {
  double lo = 0.0;
  double hi = 0.0;

  double length() const noexcept { return hi - lo; }
  bool operator==(const ParameterRange&) const = default;
};

Eigen::Index ambient_dimension(Generator g);

// Target range and the source range for each overlap mode. Partial is the
// second quarter of the target range; none is half as wide as the target
// and starts past its end with a gap. The circle only supports full.
ParameterRange default_target_range(Generator g);
ParameterRange default_source_range(Generator g, Overlap mode);

// Unit-norm coefficient vectors (degree-2 monomial basis in graded-lex
// order) of the polynomials that cut out each base variety, one per column.
Eigen::MatrixXd true_coefficients(Generator g);

// Largest |p(x)| over columns for the base variety's defining polynomials.
double max_defining_violation(Generator g, const Eigen::MatrixXd& points);

// Independent stream for (seed, tag).
manifolds::Rng seeded_rng(std::uint64_t seed, std::uint64_t tag);

PointCloud sample(Generator g, Eigen::Index s, std::uint64_t seed, const ParameterRange& range);
PointCloud sample_circle(Eigen::Index s, std::uint64_t seed);
PointCloud sample_union_two_subspaces(Eigen::Index s, std::uint64_t seed);
PointCloud sample_parabola(Eigen::Index s, std::uint64_t seed);
PointCloud sample_quadratic_surface_3d(Eigen::Index s, std::uint64_t seed);

PointCloud add_noise(const PointCloud& x, double sigma, std::uint64_t seed);

// Haar-distributed orthogonal matrix on the det = branch component.
Eigen::MatrixXd random_orthogonal(Eigen::Index n, int branch, std::uint64_t seed);
// Uniform on the sphere of the given radius.
Eigen::VectorXd random_translation(Eigen::Index n, double magnitude, std::uint64_t seed);

struct Scenario {
  Generator generator = Generator::parabola;
  Eigen::Index s1 = 200;
  Eigen::Index s2 = 200;
  double sigma = 0.0;
  Overlap overlap = Overlap::full;
  std::uint64_t seed = 0;
  double translation_magnitude = 1.0;
  // Unset means the generator defaults above.
  std::optional<ParameterRange> target_range;
  std::optional<ParameterRange> source_range;

  ParameterRange resolved_target_range() const;
  ParameterRange resolved_source_range() const;
  void validate() const;
};

struct GroundTruth {
  PointCloud m1;  // clean source, in its own frame
  PointCloud m2;  // clean target
  Eigen::MatrixXd rotation;
  Eigen::VectorXd translation;
  Eigen::MatrixXd coefficients;
  ParameterRange source_range;
  ParameterRange target_range;
};

struct Pair {
  PointCloud m1_hat;
  PointCloud m2_hat;
  GroundTruth truth;
};

// M2 samples the target range; M1 = Q0^T (P - a0) with P sampled on the
// source range, so Q0 M1 + a0 lies on the base variety. Noise is drawn
// independently for each cloud.
Pair make_pair(const Scenario& scenario);

}  // namespace variety::synth
