#pragma once

#include <string>
#include <vector>

namespace biopt {

struct CheckResult {
  std::string suite;
  std::string name;
  double value = 0.0;      // worst observed violation (or failure count)
  double threshold = 0.0;  // pass iff value <= threshold
  bool pass = false;
  std::string detail;
};

std::vector<std::string> suite_ids();

// Fixed-seed property suites; "all" runs every suite.
std::vector<CheckResult> run_suite(const std::string& id);

}  // namespace biopt
