#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "psmcrb/specfn.hpp"

namespace psmcrb {

struct SelfcheckOptions {
  /// Monte-Carlo sample count for the statistical checks. Bands are stated
  /// in standard errors, so fewer trials widen them automatically.
  std::int64_t trials = 20000;
  std::uint64_t seed = 7;
  /// The derivatives under test. Replaceable so a harness can inject a
  /// broken implementation and confirm the check catches it.
  std::function<double(const specfn::ChiSqParams&)> dlambda = specfn::chi2_cdf_dlambda;
  std::function<double(const specfn::ChiSqParams&)> d2lambda = specfn::chi2_cdf_d2lambda;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Runs the invariant suites of every module at reduced scale. A check that
/// throws is reported as failed with the exception text.
std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& options = {},
                                       const std::function<void(const CheckResult&)>& on_result = {});

}  // namespace psmcrb
