#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mmdim::report {

// One executable assertion. `slack` is the smallest margin over all cases
// (>= 0 when the inequality holds; residuals are reported negated).
struct Assertion {
  std::string suite;
  std::string name;
  bool passed = true;
  double slack = 0.0;
  std::size_t cases = 0;
  std::string detail;
};

std::vector<Assertion> verify_counting(std::uint64_t seed);
std::vector<Assertion> verify_pressure(std::uint64_t seed);
std::vector<Assertion> verify_caratheodory(std::uint64_t seed);
std::vector<Assertion> verify_entropy(std::uint64_t seed);

// counting | pressure | caratheodory | entropy | finite-scale | all
std::vector<Assertion> verify_suite(const std::string& suite, std::uint64_t seed);

}  // namespace mmdim::report
