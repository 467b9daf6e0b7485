#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "variety/errors.hpp"
#include "variety/io.hpp"
#include "variety/synth.hpp"

using namespace variety;

namespace {

std::filesystem::path scratch_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("variety_io_" + tag + "_" + std::to_string(std::random_device{}()));
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("CSV round-trip is bit exact") {
  Eigen::MatrixXd v = testing::gaussian(3, 50, 1);
  v(0, 0) = 1e-300;
  v(1, 0) = -123456789.123456789;
  v(2, 0) = 0.1;
  const PointCloud x(v);
  std::istringstream in(io::format_csv(x, "x,y,z"));
  const PointCloud y = io::parse_csv(in);
  CHECK(y.values.rows() == 3);
  CHECK(y.values.cols() == 50);
  CHECK((y.values.array() == v.array()).all());
}

TEST_CASE("CSV reader skips comments and blank lines") {
  std::istringstream in("# x,y\n\n1,2\n  \n# note\n3,4\n");
  const PointCloud x = io::parse_csv(in);
  REQUIRE(x.size() == 2);
  CHECK(x.values(0, 1) == 3.0);
  CHECK(x.values(1, 0) == 2.0);
}

TEST_CASE("CSV reader rejects malformed input") {
  for (const char* bad : {"1,2\n3\n", "1,abc\n", "1,nan\n", "1,inf\n", "", "# only a comment\n"}) {
    std::istringstream in(bad);
    CHECK_THROWS_AS(io::parse_csv(in), FormatError);
  }
  CHECK_THROWS_AS(io::read_csv("/nonexistent/cloud.csv"), FormatError);
}

TEST_CASE("files are written atomically and read back") {
  const auto dir = scratch_dir("atomic");
  const auto path = dir / "cloud.csv";
  const PointCloud x(testing::gaussian(2, 10, 2));
  io::write_csv(path, x);
  CHECK((io::read_csv(path).values - x.values).norm() == 0.0);
  io::write_file_atomic(path, "overwritten\n");
  CHECK(io::read_file(path) == "overwritten\n");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("matrix JSON is row-major") {
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const auto j = io::matrix_to_json(m);
  CHECK(j[1][0].get<double>() == 4.0);
  CHECK((io::matrix_from_json(j) - m).norm() == 0.0);
  CHECK_THROWS_AS(io::matrix_from_json(io::json::parse("[[1,2],[3]]")), FormatError);
  CHECK_THROWS_AS(io::matrix_from_json(io::json::parse("[]")), FormatError);
}

TEST_CASE("model, scaling and transform JSON round-trips") {
  manifolds::Rng rng(3);
  const auto basis = features::build_basis(3, 2);
  const VarietyModel m{manifolds::random_grassmann(basis.size(), 2, rng), basis};
  const VarietyModel m2 = io::model_from_json(io::to_json(m));
  CHECK(m2.basis == m.basis);
  CHECK(manifolds::projector_distance(m2.subspace.basis, m.subspace.basis) < 1e-12);

  AffineScaling s;
  s.shift = Eigen::Vector3d(0.5, -1, 2);
  s.scale = 3.25;
  const AffineScaling s2 = io::scaling_from_json(io::to_json(s));
  CHECK(s2.scale == s.scale);
  CHECK((s2.shift - s.shift).norm() == 0.0);

  RigidTransform t;
  t.rotation = manifolds::random_rotation(3, -1, rng);
  t.translation = Eigen::Vector3d(1, 2, 3);
  const RigidTransform t2 = io::transform_from_json(io::to_json(t));
  CHECK((t2.rotation.matrix - t.rotation.matrix).norm() == 0.0);
  CHECK(t2.rotation.branch == -1);
  CHECK((t2.translation - t.translation).norm() == 0.0);
}

TEST_CASE("scenario JSON round-trips") {
  synth::Scenario sc;
  sc.generator = synth::Generator::quadratic_surface_3d;
  sc.overlap = synth::Overlap::partial;
  sc.s1 = 33;
  sc.s2 = 44;
  sc.sigma = 0.05;
  sc.seed = 0xFFFFFFFFFFFFull;
  sc.source_range = synth::ParameterRange{-0.3, 0.7};
  const synth::Scenario back = io::scenario_from_json(io::to_json(sc));
  CHECK(back.generator == sc.generator);
  CHECK(back.overlap == sc.overlap);
  CHECK(back.s1 == 33);
  CHECK(back.s2 == 44);
  CHECK(back.sigma == sc.sigma);
  CHECK(back.seed == sc.seed);
  CHECK(back.resolved_source_range() == *sc.source_range);
  CHECK(back.resolved_target_range() == synth::default_target_range(sc.generator));
}

TEST_CASE("bad model JSON is a format error") {
  auto j = io::to_json(VarietyModel{manifolds::orthonormalize(Eigen::VectorXd::Ones(6)), features::build_basis(2, 2)});
  j["coefficients"] = io::json::array({io::json::array({1.0, 2.0})});
  CHECK_THROWS_AS(io::model_from_json(j), FormatError);
  CHECK_THROWS_AS(io::model_from_json(io::json::object()), FormatError);
}

TEST_CASE("non-finite SURE values serialize as null") {
  SureReport r;
  r.r_hat = std::numeric_limits<double>::infinity();
  const auto j = io::to_json(r);
  CHECK(j["r_hat"].is_null());
  CHECK(io::dump(j).back() == '\n');
}
