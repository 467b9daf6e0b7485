#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace variety::cli {

enum ExitCode : int {
  kOk = 0,
  kBenchFailure = 1,
  kUsage = 2,
  kAssumption = 3,
};

// args excludes the program name. VARIETY_SEED, when set, overrides --seed.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace variety::cli
