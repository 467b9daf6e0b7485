#include "variety/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "variety/errors.hpp"
#include "variety/features.hpp"

namespace variety::synth {

namespace {

constexpr double kLineAngle0 = 0.3;
constexpr double kLineAngle1 = 1.9;

// Stream tags inside make_pair.
constexpr std::uint64_t kTagTarget = 1;
constexpr std::uint64_t kTagSource = 2;
constexpr std::uint64_t kTagRotation = 3;
constexpr std::uint64_t kTagTranslation = 4;
constexpr std::uint64_t kTagNoiseTarget = 5;
constexpr std::uint64_t kTagNoiseSource = 6;

double surface_height(double x, double y) { return 0.5 * x * x + 0.25 * y * y; }

// Coefficients of a degree-2 polynomial given as (exponent, value) terms.
Eigen::VectorXd polynomial(int n, const std::vector<std::pair<features::Exponent, double>>& terms) {
  const features::MonomialBasis basis = features::build_basis(n, 2);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size());
  for (const auto& [exponent, value] : terms) {
    bool found = false;
    for (Eigen::Index k = 0; k < basis.size(); ++k) {
      if (basis.exponents[static_cast<std::size_t>(k)] == exponent) {
        c(k) += value;
        found = true;
      }
    }
    if (!found) throw std::logic_error("monomial not in basis");
  }
  return c.normalized();
}

}  // namespace

std::string to_string(Generator g) {
  switch (g) {
    case Generator::circle: return "circle";
    case Generator::union_two_subspaces: return "union_two_subspaces";
    case Generator::parabola: return "parabola";
    case Generator::quadratic_surface_3d: return "quadratic_surface_3d";
  }
  return "unknown";
}

std::string to_string(Overlap o) {
  switch (o) {
    case Overlap::full: return "full";
    case Overlap::partial: return "partial";
    case Overlap::none: return "none";
  }
  return "unknown";
}

Generator generator_from_string(const std::string& name) {
  for (Generator g : {Generator::circle, Generator::union_two_subspaces, Generator::parabola,
                      Generator::quadratic_surface_3d}) {
    if (to_string(g) == name) return g;
  }
  throw InvalidArgument("unknown generator '" + name +
                        "' (expected circle, union_two_subspaces, parabola or quadratic_surface_3d)");
}

Overlap overlap_from_string(const std::string& name) {
  for (Overlap o : {Overlap::full, Overlap::partial, Overlap::none}) {
    if (to_string(o) == name) return o;
  }
  throw InvalidArgument("unknown overlap mode '" + name + "' (expected full, partial or none)");
}

Eigen::Index ambient_dimension(Generator g) { return g == Generator::quadratic_surface_3d ? 3 : 2; }

ParameterRange default_target_range(Generator g) {
  switch (g) {
    case Generator::circle: return {0.0, 2.0 * std::numbers::pi};
    case Generator::union_two_subspaces: return {-1.0, 1.0};
    case Generator::parabola:
    case Generator::quadratic_surface_3d: return {-2.0, 2.0};
  }
  return {};
}

ParameterRange default_source_range(Generator g, Overlap mode) {
  const ParameterRange t = default_target_range(g);
  if (mode == Overlap::full) return t;
  if (g == Generator::circle) {
    throw InvalidArgument("the circle generator only supports full overlap");
  }
  if (mode == Overlap::partial) {
    const double lo = t.lo + 0.25 * t.length();
    return {lo, lo + 0.25 * t.length()};
  }
  const double width = 0.5 * t.length();
  const double lo = t.hi + 0.25 * width;
  return {lo, lo + width};
}

Eigen::MatrixXd true_coefficients(Generator g) {
  using features::Exponent;
  switch (g) {
    case Generator::circle:
      return polynomial(2, {{Exponent{0, 0}, -1.0}, {Exponent{2, 0}, 1.0}, {Exponent{0, 2}, 1.0}});
    case Generator::union_two_subspaces: {
      // (x sin a0 - y cos a0)(x sin a1 - y cos a1)
      const double s0 = std::sin(kLineAngle0), c0 = std::cos(kLineAngle0);
      const double s1 = std::sin(kLineAngle1), c1 = std::cos(kLineAngle1);
      return polynomial(2, {{Exponent{2, 0}, s0 * s1},
                            {Exponent{1, 1}, -(s0 * c1 + c0 * s1)},
                            {Exponent{0, 2}, c0 * c1}});
    }
    case Generator::parabola:
      return polynomial(2, {{Exponent{0, 1}, 1.0}, {Exponent{2, 0}, -1.0}});
    case Generator::quadratic_surface_3d:
      return polynomial(3, {{Exponent{0, 0, 1}, 1.0}, {Exponent{2, 0, 0}, -0.5}, {Exponent{0, 2, 0}, -0.25}});
  }
  return {};
}

double max_defining_violation(Generator g, const Eigen::MatrixXd& points) {
  const Eigen::Index n = ambient_dimension(g);
  if (points.rows() != n) throw InvalidArgument("max_defining_violation: dimension mismatch");
  const auto basis = features::build_basis(static_cast<int>(n), 2);
  const Eigen::MatrixXd values = true_coefficients(g).transpose() * features::feature_matrix(points, basis);
  return values.size() == 0 ? 0.0 : values.cwiseAbs().maxCoeff();
}

manifolds::Rng seeded_rng(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  return manifolds::Rng(seq);
}

PointCloud sample(Generator g, Eigen::Index s, std::uint64_t seed, const ParameterRange& range) {
  if (s < 1) throw InvalidArgument("sample count must be >= 1");
  if (!(range.hi > range.lo)) throw InvalidArgument("parameter range must have hi > lo");
  manifolds::Rng rng = seeded_rng(seed, 0);
  std::uniform_real_distribution<double> param(range.lo, range.hi);
  const Eigen::Index n = ambient_dimension(g);
  Eigen::MatrixXd x(n, s);
  switch (g) {
    case Generator::circle:
      for (Eigen::Index i = 0; i < s; ++i) {
        const double theta = param(rng);
        x(0, i) = std::cos(theta);
        x(1, i) = std::sin(theta);
      }
      break;
    case Generator::union_two_subspaces:
      if (s < 2) throw InvalidArgument("union_two_subspaces needs s >= 2");
      for (Eigen::Index i = 0; i < s; ++i) {
        const double angle = i % 2 == 0 ? kLineAngle0 : kLineAngle1;
        const double t = param(rng);
        x(0, i) = t * std::cos(angle);
        x(1, i) = t * std::sin(angle);
      }
      break;
    case Generator::parabola:
      for (Eigen::Index i = 0; i < s; ++i) {
        const double t = param(rng);
        x(0, i) = t;
        x(1, i) = t * t;
      }
      break;
    case Generator::quadratic_surface_3d: {
      std::uniform_real_distribution<double> second(-2.0, 2.0);
      for (Eigen::Index i = 0; i < s; ++i) {
        const double u = param(rng);
        const double v = second(rng);
        x(0, i) = u;
        x(1, i) = v;
        x(2, i) = surface_height(u, v);
      }
      break;
    }
  }
  return PointCloud(std::move(x), to_string(g));
}

PointCloud sample_circle(Eigen::Index s, std::uint64_t seed) {
  return sample(Generator::circle, s, seed, default_target_range(Generator::circle));
}

PointCloud sample_union_two_subspaces(Eigen::Index s, std::uint64_t seed) {
  return sample(Generator::union_two_subspaces, s, seed,
                default_target_range(Generator::union_two_subspaces));
}

PointCloud sample_parabola(Eigen::Index s, std::uint64_t seed) {
  return sample(Generator::parabola, s, seed, default_target_range(Generator::parabola));
}

PointCloud sample_quadratic_surface_3d(Eigen::Index s, std::uint64_t seed) {
  return sample(Generator::quadratic_surface_3d, s, seed,
                default_target_range(Generator::quadratic_surface_3d));
}

PointCloud add_noise(const PointCloud& x, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
  if (sigma == 0.0) return x;
  manifolds::Rng rng = seeded_rng(seed, 0);
  std::normal_distribution<double> gauss(0.0, sigma);
  Eigen::MatrixXd v = x.values;
  for (Eigen::Index k = 0; k < v.size(); ++k) v.data()[k] += gauss(rng);
  return PointCloud(std::move(v), x.name);
}

Eigen::MatrixXd random_orthogonal(Eigen::Index n, int branch, std::uint64_t seed) {
  manifolds::Rng rng = seeded_rng(seed, 0);
  return manifolds::random_rotation(n, branch, rng).matrix;
}

Eigen::VectorXd random_translation(Eigen::Index n, double magnitude, std::uint64_t seed) {
  manifolds::Rng rng = seeded_rng(seed, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(n);
  do {
    for (Eigen::Index k = 0; k < n; ++k) v(k) = gauss(rng);
  } while (v.norm() == 0.0);
  return magnitude * v.normalized();
}

ParameterRange Scenario::resolved_target_range() const {
  return target_range ? *target_range : default_target_range(generator);
}

ParameterRange Scenario::resolved_source_range() const {
  return source_range ? *source_range : default_source_range(generator, overlap);
}

void Scenario::validate() const {
  if (s1 < 1 || s2 < 1) throw InvalidArgument("scenario: s1 and s2 must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("scenario: sigma must be >= 0");
  if (!(translation_magnitude >= 0.0)) throw InvalidArgument("scenario: translation magnitude must be >= 0");
  const ParameterRange t = resolved_target_range();
  const ParameterRange s = resolved_source_range();
  if (!(t.hi > t.lo) || !(s.hi > s.lo)) throw InvalidArgument("scenario: empty parameter range");
}

Pair make_pair(const Scenario& scenario) {
  scenario.validate();
  const Generator g = scenario.generator;
  const Eigen::Index n = ambient_dimension(g);
  // Sub-seeds are themselves derived so that changing one stream never
  // shifts another.
  auto sub_seed = [&](std::uint64_t tag) { return seeded_rng(scenario.seed, tag)(); };

  Pair out;
  GroundTruth& truth = out.truth;
  truth.target_range = scenario.resolved_target_range();
  truth.source_range = scenario.resolved_source_range();
  truth.coefficients = true_coefficients(g);
  truth.rotation = random_orthogonal(n, 1, sub_seed(kTagRotation));
  truth.translation = random_translation(n, scenario.translation_magnitude, sub_seed(kTagTranslation));

  truth.m2 = sample(g, scenario.s2, sub_seed(kTagTarget), truth.target_range);
  truth.m2.name = "target";
  const PointCloud on_target = sample(g, scenario.s1, sub_seed(kTagSource), truth.source_range);
  truth.m1 = PointCloud(truth.rotation.transpose() * (on_target.values.colwise() - truth.translation),
                        "source");

  out.m2_hat = add_noise(truth.m2, scenario.sigma, sub_seed(kTagNoiseTarget));
  out.m1_hat = add_noise(truth.m1, scenario.sigma, sub_seed(kTagNoiseSource));
  return out;
}

}  // namespace variety::synth
