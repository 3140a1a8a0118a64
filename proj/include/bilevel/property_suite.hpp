#pragma once

#include <string>
#include <vector>

namespace bilevel {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast cross-checks of the library against independent oracles (finite differences,
/// brute-force projections, serial kernels, closed forms). Runs in a few seconds.
std::vector<PropertyResult> run_property_suite();

}  // namespace bilevel
