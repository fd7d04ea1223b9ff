#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sequnet {

struct SuiteEntry {
  std::string name;
  int instances = 0;
  double max_rel_error = 0.0;
  std::string worst;  // parameter behind max_rel_error
  int skipped_elements = 0;
  bool passed = false;
};

// Finite-difference checks in 64-bit of every differentiable op and of small
// random networks of each variant (covering every block and identity kind),
// `instances` random cases each.
std::vector<SuiteEntry> run_gradcheck_suite(int instances, std::uint64_t seed, double tolerance = 1e-5);

}  // namespace sequnet
