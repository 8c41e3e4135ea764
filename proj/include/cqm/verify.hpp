#pragma once

#include <string>
#include <vector>

namespace cqm {

struct VerifyResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Runs the cross-module invariant suite (generator equivalence, shift
/// identity, moment/steady-state oracles, thermal relations, trajectory
/// determinism, state hygiene). Fast enough for interactive use.
std::vector<VerifyResult> run_verification_suite();

}  // namespace cqm
