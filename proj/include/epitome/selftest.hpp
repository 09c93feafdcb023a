#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace epitome {

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Built-in oracle suites: product/index/score against a direct scan,
/// morphology laws against brute force, EM monotonicity, and the parallel
/// kernels against their serial references.
std::vector<SelftestCheck> run_selftest(std::uint64_t seed = 1);

}  // namespace epitome
