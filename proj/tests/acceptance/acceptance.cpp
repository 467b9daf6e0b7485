// Acceptance matrix. With no arguments every case runs; otherwise only the
// named ones. One line per criterion, exit status 1 if any fails.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "variety_cli/bench.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> names(argv + 1, argv + argc);
  if (names.empty()) names.push_back("all");
  variety::bench::BenchOptions opts;
  bool all_pass = true;
  try {
    for (const auto& r : variety::bench::run_cases(names, opts)) {
      std::string worst;
      for (const auto& c : r.checks) {
        if (!c.pass && worst.empty()) worst = "; first failing check: " + c.label;
      }
      std::printf("criterion %d %-13s %s (%zu checks, %.1f s%s)\n", r.criterion, r.name.c_str(),
                  r.pass ? "PASS" : "FAIL", r.checks.size(), r.seconds, worst.c_str());
      all_pass = all_pass && r.pass;
    }
  } catch (const std::exception& e) {
    std::printf("error: %s\n", e.what());
    return 2;
  }
  std::fflush(stdout);
  return all_pass ? 0 : 1;
}
