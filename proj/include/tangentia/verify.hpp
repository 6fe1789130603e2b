#pragma once

// Named verification suites run by `tangentia verify`.

#include <cstdint>
#include <string>
#include <vector>

namespace tangentia::verify {

struct CheckResult {
  std::string suite;
  std::string name;
  bool pass = false;
  std::string detail;
};

const std::vector<std::string>& suite_names();

/// Runs one suite, or every suite for "all". Unknown names throw ArgumentError.
std::vector<CheckResult> run_suite(const std::string& name, std::uint64_t seed = 0);

}  // namespace tangentia::verify
