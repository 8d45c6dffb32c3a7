#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace softad {

struct VerifyOptions {
  std::uint64_t seed = 0;
  /// Mutation hook: swaps phi for a slightly scaled copy inside the SoftAD
  /// direction so the gradient-consistency check must fail.
  bool perturb_phi = false;
};

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct VerifyCheck {
  std::string name;
  std::function<CheckResult(const VerifyOptions&)> run;
};

const std::vector<VerifyCheck>& registered_checks();

/// One line per check:
///   check=<name> status=<pass|fail> measured=<value> tolerance=<value>
std::string format_check(const CheckResult& result);

/// Runs every registered check and writes one report line each. Returns true
/// when all pass.
bool run_verify(const VerifyOptions& options, std::ostream& report);

}  // namespace softad
