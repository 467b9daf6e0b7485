#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "variety/denoise.hpp"
#include "variety/point_cloud.hpp"
#include "variety/registration.hpp"
#include "variety/sure.hpp"
#include "variety/synth.hpp"

namespace variety::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// One point per row, n comma-separated decimal fields. Lines starting with
// '#' and blank lines are skipped. Throws FormatError on ragged rows,
// unparsable or non-finite fields, or an empty file.
PointCloud parse_csv(std::istream& in, const std::string& source_name = "<stream>");
PointCloud read_csv(const std::filesystem::path& path);

// Shortest round-trip decimal form, so read(write(x)) == x.
std::string format_csv(const PointCloud& cloud, const std::string& header = {});
void write_csv(const std::filesystem::path& path, const PointCloud& cloud,
               const std::string& header = {});

// Writes to a sibling temporary file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// Pretty-printed with a trailing newline.
std::string dump(const json& j);
void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

json matrix_to_json(const Eigen::MatrixXd& m);  // row-major nested arrays
Eigen::MatrixXd matrix_from_json(const json& j);

json to_json(const features::MonomialBasis& basis);
json to_json(const VarietyModel& model);
VarietyModel model_from_json(const json& j);
json to_json(const AffineScaling& scaling);
AffineScaling scaling_from_json(const json& j);
json to_json(const RigidTransform& t);
RigidTransform transform_from_json(const json& j);

json to_json(const manifolds::TRResult& solver_summary);
json to_json(const StageRecord& stage);
json to_json(const DenoiseResult& result);
json to_json(const SureReport& report);
json to_json(const RegisterResult& result);
json to_json(const PipelineResult& result);

json to_json(const synth::ParameterRange& range);
json to_json(const synth::Scenario& scenario);
synth::Scenario scenario_from_json(const json& j);

}  // namespace variety::io
