#pragma once

#include <vector>

namespace psmcrb::specfn {

/// Degrees of freedom, threshold and noncentrality of a chi-square tail
/// evaluation. Valid when r >= 1, gamma_thr >= 0 and lambda >= 0.
struct ChiSqParams {
  int r = 1;
  double gamma_thr = 0.0;
  double lambda = 0.0;

  void validate() const;
};

struct GammaPair {
  double lower;  // P(a, x)
  double upper;  // Q(a, x) = 1 - P(a, x), computed without cancellation
};

/// Regularized incomplete gamma pair. Series for x < a + 1, Lentz continued
/// fraction otherwise; whichever side is computed directly is accurate to
/// ~1e-15 relative, the other is its complement.
GammaPair reg_gamma_pair(double a, double x);

double reg_lower_gamma(double a, double x);
double reg_upper_gamma(double a, double x);

/// F_r(g; 0) = P(r/2, g/2).
double chi2_cdf_central(int r, double gamma_thr);

double chi2_cdf_noncentral(const ChiSqParams& p);
double chi2_survival_noncentral(const ChiSqParams& p);

/// dF_r/dlambda = (F_{r+2} - F_r) / 2. Never positive.
double chi2_cdf_dlambda(const ChiSqParams& p);

/// d^2F_r/dlambda^2 = (F_r - 2 F_{r+2} + F_{r+4}) / 4.
double chi2_cdf_d2lambda(const ChiSqParams& p);

/// Everything the estimators, moments and bounds need at one noncentrality,
/// accumulated from a single Poisson window so the truncation error is shared.
struct NoncentralTerms {
  double cdf;       // F_r(g; l)
  double survival;  // Q_r(g; l) = 1 - F_r(g; l)
  double diff1;     // F_r - F_{r+2}        (>= 0)
  double diff2;     // F_r - 2 F_{r+2} + F_{r+4}
};

/// Noncentral chi-square family at fixed (r, gamma_thr). The central
/// quantities P(r/2 + m, g/2), Q(r/2 + m, g/2) and the gamma densities they
/// differ by do not depend on lambda, so they are tabulated once; each
/// evaluation is then a Poisson-weighted sum.
///
/// The Poisson series is summed outward from m* = floor(lambda/2) until the
/// bound on the remaining Poisson mass drops below 1e-15 (upward, also below
/// 1e-16 of the survival sum so tiny tails keep relative accuracy), with a
/// hard cap of 10,000 terms (NumericalError past the cap).
class NoncentralChiSq {
 public:
  NoncentralChiSq(int r, double gamma_thr);

  int dof() const noexcept { return r_; }
  double threshold() const noexcept { return gamma_thr_; }

  NoncentralTerms terms(double lambda) const;
  double cdf(double lambda) const { return terms(lambda).cdf; }
  double survival(double lambda) const { return terms(lambda).survival; }

 private:
  struct Central {
    double lower;    // P(a_m, x)
    double upper;    // Q(a_m, x)
    double density;  // x^{a_m} e^{-x} / Gamma(a_m + 1) = P(a_m, x) - P(a_m + 1, x)
  };
  Central central(int m) const;
  Central compute_central(int m) const;

  int r_;
  double gamma_thr_;
  std::vector<Central> table_;
};

}  // namespace psmcrb::specfn
