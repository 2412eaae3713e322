#include "psmcrb/specfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "psmcrb/errors.hpp"

namespace psmcrb::specfn {

namespace {

constexpr int kGammaMaxIter = 500;
constexpr double kGammaTol = 1e-15;
constexpr double kTinyFloat = 1e-300;

constexpr int kPoissonMaxTerms = 10000;
constexpr double kPoissonTailTol = 1e-16;
constexpr double kSurvivalFloor = 1e-300;

constexpr int kEagerTable = 40;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double lower_series(double a, double x, double log_prefactor) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kGammaMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kGammaTol) {
      return sum * std::exp(log_prefactor);
    }
  }
  throw NumericalError("reg_gamma: series did not converge for a=" +
                       std::to_string(a) + ", x=" + std::to_string(x));
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double upper_fraction(double a, double x, double log_prefactor) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTinyFloat;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTinyFloat) d = kTinyFloat;
    c = b + an / c;
    if (std::fabs(c) < kTinyFloat) c = kTinyFloat;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kGammaTol) {
      return std::exp(log_prefactor) * h;
    }
  }
  throw NumericalError("reg_gamma: continued fraction did not converge for a=" +
                       std::to_string(a) + ", x=" + std::to_string(x));
}

// x^a e^{-x} / Gamma(a + 1)
double gamma_density_term(double a, double x) {
  if (x == 0.0) return 0.0;
  return std::exp(a * std::log(x) - x - std::lgamma(a + 1.0));
}

}  // namespace

void ChiSqParams::validate() const {
  if (r < 1) throw DomainError("chi-square: degrees of freedom must be >= 1");
  if (!(gamma_thr >= 0.0) || std::isinf(gamma_thr))
    throw DomainError("chi-square: threshold must be finite and >= 0");
  if (!(lambda >= 0.0) || std::isinf(lambda))
    throw DomainError("chi-square: noncentrality must be finite and >= 0");
}

GammaPair reg_gamma_pair(double a, double x) {
  if (!(a > 0.0) || std::isinf(a)) throw DomainError("reg_gamma: a must be > 0");
  if (!(x >= 0.0)) throw DomainError("reg_gamma: x must be >= 0");
  if (x == 0.0) return {0.0, 1.0};
  if (std::isinf(x)) return {1.0, 0.0};

  const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    const double p = clamp01(lower_series(a, x, log_prefactor));
    return {p, 1.0 - p};
  }
  const double q = clamp01(upper_fraction(a, x, log_prefactor));
  return {1.0 - q, q};
}

double reg_lower_gamma(double a, double x) { return reg_gamma_pair(a, x).lower; }

double reg_upper_gamma(double a, double x) { return reg_gamma_pair(a, x).upper; }

double chi2_cdf_central(int r, double gamma_thr) {
  ChiSqParams{r, gamma_thr, 0.0}.validate();
  return reg_lower_gamma(0.5 * r, 0.5 * gamma_thr);
}

double chi2_cdf_noncentral(const ChiSqParams& p) {
  p.validate();
  return NoncentralChiSq(p.r, p.gamma_thr).cdf(p.lambda);
}

double chi2_survival_noncentral(const ChiSqParams& p) {
  p.validate();
  return NoncentralChiSq(p.r, p.gamma_thr).survival(p.lambda);
}

double chi2_cdf_dlambda(const ChiSqParams& p) {
  p.validate();
  return -0.5 * NoncentralChiSq(p.r, p.gamma_thr).terms(p.lambda).diff1;
}

double chi2_cdf_d2lambda(const ChiSqParams& p) {
  p.validate();
  return 0.25 * NoncentralChiSq(p.r, p.gamma_thr).terms(p.lambda).diff2;
}

NoncentralChiSq::NoncentralChiSq(int r, double gamma_thr) : r_(r), gamma_thr_(gamma_thr) {
  ChiSqParams{r, gamma_thr, 0.0}.validate();
  table_.reserve(kEagerTable);
  for (int m = 0; m < kEagerTable; ++m) table_.push_back(compute_central(m));
}

NoncentralChiSq::Central NoncentralChiSq::compute_central(int m) const {
  const double a = 0.5 * r_ + m;
  const double x = 0.5 * gamma_thr_;
  const GammaPair g = reg_gamma_pair(a, x);
  return {g.lower, g.upper, gamma_density_term(a, x)};
}

NoncentralChiSq::Central NoncentralChiSq::central(int m) const {
  if (m < static_cast<int>(table_.size())) return table_[static_cast<std::size_t>(m)];
  return compute_central(m);
}

NoncentralTerms NoncentralChiSq::terms(double lambda) const {
  if (!(lambda >= 0.0) || std::isinf(lambda))
    throw DomainError("chi-square: noncentrality must be finite and >= 0");

  const double mu = 0.5 * lambda;
  double cdf = 0.0;
  double surv = 0.0;
  double diff1 = 0.0;
  double diff2 = 0.0;

  auto accumulate = [&](double w, const Central& cm, const Central& next) {
    cdf += w * cm.lower;
    surv += w * cm.upper;
    diff1 += w * cm.density;
    diff2 += w * (cm.density - next.density);
  };

  if (mu == 0.0) {
    accumulate(1.0, central(0), central(1));
    return {clamp01(cdf), clamp01(surv), diff1, diff2};
  }

  const int mstar = static_cast<int>(std::floor(mu));
  const double wstar = std::exp(mstar * std::log(mu) - mu - std::lgamma(mstar + 1.0));

  int used = 1;
  Central cm = central(mstar);
  Central next = central(mstar + 1);
  accumulate(wstar, cm, next);

  // Downward: w_{m} = w_{m+1} (m+1) / mu. Below the mode consecutive weights
  // shrink by m / mu, so the mass under m is at most w_m m / (mu - m).
  double w = wstar;
  Central upper_neighbour = cm;
  for (int m = mstar - 1; m >= 0; --m) {
    w *= (m + 1) / mu;
    const Central c = central(m);
    accumulate(w, c, upper_neighbour);
    upper_neighbour = c;
    if (++used > kPoissonMaxTerms) break;
    if (w * m / (mu - m) < kPoissonTailTol) break;
  }

  // Upward: w_{m+1} = w_m mu / (m+1). Above the mode the mass past m is at
  // most w_m mu / (m + 1 - mu). The upper gammas grow with m, so the survival
  // sum also needs the bound small relative to what it has accumulated.
  w = wstar;
  Central c = next;
  for (int m = mstar + 1;; ++m) {
    w *= mu / m;
    const Central after = central(m + 1);
    accumulate(w, c, after);
    c = after;
    const double rest = w * mu / (m + 1 - mu);
    if (rest < kPoissonTailTol && rest <= kPoissonTailTol * std::max(surv, kSurvivalFloor)) break;
    if (++used > kPoissonMaxTerms) {
      throw NumericalError("noncentral chi-square: Poisson series exceeded " +
                           std::to_string(kPoissonMaxTerms) + " terms (lambda=" +
                           std::to_string(lambda) + ")");
    }
  }
  if (used > kPoissonMaxTerms) {
    throw NumericalError("noncentral chi-square: Poisson series exceeded term cap");
  }

  return {clamp01(cdf), clamp01(surv), diff1, diff2};
}

}  // namespace psmcrb::specfn
