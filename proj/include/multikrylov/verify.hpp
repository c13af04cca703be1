#pragma once

// Quick self-check suite behind the `verify` verb: analytic cases, oracle
// agreement and recursion properties on small systems (seconds, not minutes).

#include <string>
#include <vector>

namespace multikrylov::verify {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<Check> run_suite();

}  // namespace multikrylov::verify
