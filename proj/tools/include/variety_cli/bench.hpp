#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace variety::bench {

struct Check {
  std::string label;
  double measured = 0.0;
  double reference = 0.0;  // reference value or bound
  std::string rule;        // e.g. "ratio in [0.5, 2]" or "<= bound"
  bool pass = false;
};

struct CaseResult {
  std::string name;
  int criterion = 0;
  bool pass = false;
  std::vector<Check> checks;
  nlohmann::json details;
  double seconds = 0.0;  // kept out of the JSON report
};

struct BenchOptions {
  std::uint64_t seed = 2024;
};

const std::vector<std::string>& case_names();

// Throws InvalidArgument on an unknown case name.
CaseResult run_case(const std::string& name, const BenchOptions& opts);
std::vector<CaseResult> run_cases(const std::vector<std::string>& names, const BenchOptions& opts);

nlohmann::json report_json(const std::vector<CaseResult>& results);
std::string report_table(const std::vector<CaseResult>& results);

}  // namespace variety::bench
