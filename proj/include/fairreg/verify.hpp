#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fairreg::verify {

struct PropertyResult {
  std::string name;
  bool pass = false;
  std::string detail;  // filled on failure (and for notable measurements)
};

// Randomized property suites at desk scale (each runs in seconds). The same
// checks back the unit tests and the `verify` subcommand.
std::vector<PropertyResult> metrics_suite(std::uint64_t seed = 42);
std::vector<PropertyResult> bounds_suite(std::uint64_t seed = 42);
std::vector<PropertyResult> nn_suite(std::uint64_t seed = 42);

bool all_passed(const std::vector<PropertyResult>& results);

}  // namespace fairreg::verify
