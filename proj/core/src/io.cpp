#include "variety/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/LU>

#include "variety/errors.hpp"

namespace variety::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

template <class T>
T get_field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw FormatError(std::string("missing JSON field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad JSON field '") + key + "': " + e.what());
  }
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

PointCloud parse_csv(std::istream& in, const std::string& source_name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = body.find(',', start);
      const std::string_view field =
          trim(body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      double v = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size() ||
          !std::isfinite(v)) {
        throw FormatError(source_name + ":" + std::to_string(line_no) + ": bad numeric field '" +
                          std::string(field) + "'");
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError(source_name + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(rows.front().size()) + " fields, got " +
                        std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError(source_name + ": no data rows");
  const auto n = static_cast<Eigen::Index>(rows.front().size());
  const auto s = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd values(n, s);
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      values(k, i) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
  }
  return PointCloud(std::move(values), source_name);
}

PointCloud read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return parse_csv(in, path.string());
}

std::string format_csv(const PointCloud& cloud, const std::string& header) {
  std::string out;
  if (!header.empty()) {
    std::istringstream lines(header);
    std::string l;
    while (std::getline(lines, l)) out += "# " + l + "\n";
  }
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    for (Eigen::Index k = 0; k < cloud.dim(); ++k) {
      if (k > 0) out += ',';
      append_double(out, cloud.values(k, i));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const PointCloud& cloud, const std::string& header) {
  write_file_atomic(path, format_csv(cloud, header));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::random_device rd;
  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw FormatError("failed writing " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw FormatError("cannot write " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_json(const std::filesystem::path& path, const json& j) { write_file_atomic(path, dump(j)); }

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw FormatError("matrix must be a non-empty array of rows");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) throw FormatError("matrix rows must be non-empty arrays");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw FormatError("ragged matrix in JSON");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw FormatError("non-numeric matrix entry in JSON");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

json to_json(const features::MonomialBasis& basis) {
  return json{{"n", basis.n}, {"degree", basis.d}, {"exponents", basis.exponents}};
}

json to_json(const VarietyModel& model) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["basis"] = to_json(model.basis);
  j["q"] = model.q();
  // One row per polynomial, coefficients in basis order.
  j["coefficients"] = matrix_to_json(model.subspace.basis.transpose());
  return j;
}

VarietyModel model_from_json(const json& j) {
  const json basis = get_field<json>(j, "basis");
  const int n = get_field<int>(basis, "n");
  const int d = get_field<int>(basis, "degree");
  VarietyModel model;
  try {
    model.basis = features::build_basis(n, d);
  } catch (const std::exception& e) {
    throw FormatError(std::string("bad model basis: ") + e.what());
  }
  if (basis.contains("exponents") &&
      basis.at("exponents").get<std::vector<features::Exponent>>() != model.basis.exponents) {
    throw FormatError("model exponents do not match the graded-lex monomial basis");
  }
  const Eigen::MatrixXd coeffs = matrix_from_json(get_field<json>(j, "coefficients")).transpose();
  if (coeffs.rows() != model.basis.size()) throw FormatError("coefficient count does not match basis");
  try {
    model.subspace = manifolds::orthonormalize(coeffs);
  } catch (const std::exception& e) {
    throw FormatError(std::string("bad model coefficients: ") + e.what());
  }
  return model;
}

json to_json(const AffineScaling& scaling) {
  return json{{"shift", std::vector<double>(scaling.shift.data(), scaling.shift.data() + scaling.shift.size())},
              {"scale", scaling.scale}};
}

AffineScaling scaling_from_json(const json& j) {
  AffineScaling s;
  const auto shift = get_field<std::vector<double>>(j, "shift");
  s.shift = Eigen::Map<const Eigen::VectorXd>(shift.data(), static_cast<Eigen::Index>(shift.size()));
  s.scale = get_field<double>(j, "scale");
  if (!(s.scale > 0.0)) throw FormatError("scaling scale must be positive");
  return s;
}

json to_json(const RigidTransform& t) {
  return json{{"rotation", matrix_to_json(t.rotation.matrix)},
              {"translation", std::vector<double>(t.translation.data(), t.translation.data() + t.translation.size())},
              {"branch", t.rotation.branch}};
}

RigidTransform transform_from_json(const json& j) {
  RigidTransform t;
  t.rotation.matrix = matrix_from_json(get_field<json>(j, "rotation"));
  const auto a = get_field<std::vector<double>>(j, "translation");
  t.translation = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
  if (t.rotation.matrix.rows() != t.rotation.matrix.cols() || t.rotation.matrix.rows() != t.translation.size()) {
    throw FormatError("transform rotation/translation sizes disagree");
  }
  t.rotation.branch = t.rotation.matrix.determinant() < 0.0 ? -1 : 1;
  return t;
}

json to_json(const manifolds::TRResult& r) {
  return json{{"cost", r.cost},
              {"gradient_norm", r.gradient_norm},
              {"iterations", r.iterations},
              {"hessian_products", r.hessian_products},
              {"termination", manifolds::to_string(r.termination)}};
}

json to_json(const StageRecord& stage) {
  return json{{"lambda", stage.lambda},
              {"residual", stage.residual},
              {"misfit", stage.misfit},
              {"gradient_norm", stage.gradient_norm},
              {"iterations", stage.iterations},
              {"termination", manifolds::to_string(stage.termination)},
              {"refined", stage.refined}};
}

json to_json(const DenoiseResult& r) {
  json stages = json::array();
  for (const auto& s : r.stages) stages.push_back(to_json(s));
  return json{{"residual", r.residual},
              {"data_misfit_scaled", r.data_misfit},
              {"lambda_final", r.lambda_final},
              {"selected_stage", r.selected_stage},
              {"converged", r.converged},
              {"ill_determined", r.ill_determined},
              {"scaling", to_json(r.scaling)},
              {"stages", std::move(stages)}};
}

json to_json(const SureReport& r) {
  json j{{"r_hat", finite_or_null(r.r_hat)},
         {"sure_rmse", finite_or_null(r.sure_rmse)},
         {"divergence", finite_or_null(r.divergence)},
         {"sigma", r.sigma},
         {"clamped", r.clamped},
         {"divergence_out_of_range", r.divergence_out_of_range},
         {"hessian_condition", finite_or_null(r.hessian_condition)}};
  if (r.full_hessian_condition) j["full_hessian_condition"] = finite_or_null(*r.full_hessian_condition);
  return j;
}

json to_json(const RegisterResult& r) {
  json trace = json::array();
  for (const auto& t : r.trace) {
    trace.push_back(json{{"restart", t.restart},
                         {"branch", t.branch},
                         {"residual", t.residual},
                         {"gradient_norm", t.gradient_norm},
                         {"iterations", t.iterations},
                         {"converged", t.converged}});
  }
  return json{{"transform", to_json(r.transform)},
              {"residual", r.residual},
              {"restart", r.restart},
              {"branch", r.branch},
              {"gradient_norm", r.gradient_norm},
              {"converged", r.converged},
              {"restarts", std::move(trace)}};
}

json to_json(const PipelineResult& r) {
  json j = to_json(r.registration);
  j["scaled_transform"] = to_json(r.scaled_transform);
  j["scaling"] = to_json(r.target_scaling);
  j["source_denoise"] = to_json(r.source);
  j["target_denoise"] = to_json(r.target);
  return j;
}

json to_json(const synth::ParameterRange& range) { return json{{"lo", range.lo}, {"hi", range.hi}}; }

json to_json(const synth::Scenario& s) {
  return json{{"schema_version", kSchemaVersion},
              {"generator", synth::to_string(s.generator)},
              {"s1", s.s1},
              {"s2", s.s2},
              {"sigma", s.sigma},
              {"overlap", synth::to_string(s.overlap)},
              {"seed", s.seed},
              {"translation_magnitude", s.translation_magnitude},
              {"target_range", to_json(s.resolved_target_range())},
              {"source_range", to_json(s.resolved_source_range())}};
}

synth::Scenario scenario_from_json(const json& j) {
  synth::Scenario s;
  try {
    s.generator = synth::generator_from_string(get_field<std::string>(j, "generator"));
    if (j.contains("overlap")) s.overlap = synth::overlap_from_string(j.at("overlap").get<std::string>());
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  if (j.contains("s1")) s.s1 = get_field<Eigen::Index>(j, "s1");
  if (j.contains("s2")) s.s2 = get_field<Eigen::Index>(j, "s2");
  if (j.contains("sigma")) s.sigma = get_field<double>(j, "sigma");
  if (j.contains("seed")) s.seed = get_field<std::uint64_t>(j, "seed");
  if (j.contains("translation_magnitude")) s.translation_magnitude = get_field<double>(j, "translation_magnitude");
  auto range = [&](const char* key) -> std::optional<synth::ParameterRange> {
    if (!j.contains(key)) return std::nullopt;
    const json& r = j.at(key);
    return synth::ParameterRange{get_field<double>(r, "lo"), get_field<double>(r, "hi")};
  };
  s.target_range = range("target_range");
  s.source_range = range("source_range");
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid scenario: ") + e.what());
  }
  return s;
}

}  // namespace variety::io
