#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsqaoa/portfolio.hpp"

namespace wsqaoa {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs the invariant checks (QUBO equivalence, penalty separation,
/// relaxation optimality, mixer identities, elimination, baselines) on one
/// instance. Random probes draw from `seed`.
std::vector<CheckResult> verify_instance(const PortfolioInstance& instance, std::uint64_t seed = 1);

}  // namespace wsqaoa
