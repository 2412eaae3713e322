#include <doctest.h>

#include <algorithm>

#include "psmcrb/selfcheck.hpp"

using namespace psmcrb;

TEST_CASE("all invariant checks pass") {
  const auto results = run_selfcheck();
  CHECK(results.size() >= 8);
  for (const auto& r : results) {
    CAPTURE(r.name);
    CAPTURE(r.detail);
    CHECK(r.pass);
  }
}

TEST_CASE("a broken derivative is caught") {
  SelfcheckOptions opt;
  opt.dlambda = [](const specfn::ChiSqParams& p) { return -specfn::chi2_cdf_dlambda(p); };
  const auto results = run_selfcheck(opt);
  const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.pass; });
  CHECK(failed >= 1);
  const auto it = std::find_if(results.begin(), results.end(), [](const auto& r) { return !r.pass; });
  REQUIRE(it != results.end());
  CHECK(it->name.find("dlambda") != std::string::npos);
}

TEST_CASE("a broken second derivative is caught") {
  SelfcheckOptions opt;
  opt.d2lambda = [](const specfn::ChiSqParams& p) { return 1.01 * specfn::chi2_cdf_d2lambda(p) + 1e-4; };
  const auto results = run_selfcheck(opt);
  CHECK(std::any_of(results.begin(), results.end(), [](const auto& r) { return !r.pass; }));
}
