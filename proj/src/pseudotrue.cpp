#include "psmcrb/pseudotrue.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psmcrb/errors.hpp"

namespace psmcrb {

Vec pt_naive(int k, const Vec& phi, const ModelGeometry& geo, double sigma2, double gamma_thr) {
  const Vec mu = cond_mean(k, phi, geo, sigma2, gamma_thr);
  return k == 1 ? Vec(geo.Hpinv * mu) : mu;
}

Vec pt_normalized(int k, const Vec& phi, const ModelGeometry& geo, double sigma2,
                  double gamma_thr) {
  if (k == 1) return pt_naive(1, phi, geo, sigma2, gamma_thr);
  const Vec mu2 = cond_mean(k, phi, geo, sigma2, gamma_thr);
  const ShrinkageSolver solver(geo.r, gamma_thr);
  return shrink_toward_column_space(mu2, geo, sigma2, solver, Denominator::Normalized);
}

Vec pt_selective(int k, const Vec& phi, const ModelGeometry& geo, double sigma2,
                 double gamma_thr) {
  if (k == 1) return pt_naive(1, phi, geo, sigma2, gamma_thr);
  // Only the degenerate-selection check is needed here.
  cond_mean(k, phi, geo, sigma2, gamma_thr);
  return phi;
}

PseudoTrue pseudo_true(Interpretation interp, int k, const Vec& phi, const ModelGeometry& geo,
                       double sigma2, double gamma_thr) {
  switch (interp) {
    case Interpretation::Naive:
      return {interp, k, pt_naive(k, phi, geo, sigma2, gamma_thr)};
    case Interpretation::Normalized:
      return {interp, k, pt_normalized(k, phi, geo, sigma2, gamma_thr)};
    case Interpretation::SelectiveInference:
      return {interp, k, pt_selective(k, phi, geo, sigma2, gamma_thr)};
  }
  throw DomainError("pseudo_true: unknown interpretation");
}

double pt_selective_residual(const Vec& phi, const ModelGeometry& geo, double sigma2,
                             double gamma_thr) {
  const Vec mu2 = cond_mean(2, phi, geo, sigma2, gamma_thr);
  return score_residual(mu2, phi, geo, sigma2, gamma_thr, Denominator::Selective).norm();
}

ObjectiveComparison mc_objective_compare(Stream& rng, std::int64_t trials, int k,
                                         const Vec& theta_k, const std::vector<Vec>& candidates,
                                         Interpretation interp, const Vec& phi,
                                         const ModelGeometry& geo, double sigma2,
                                         double gamma_thr) {
  if (k != 1 && k != 2) throw DomainError("mc_objective: k must be 1 or 2");
  const std::size_t nc = candidates.size();

  // The penalties depend on theta only, so they are evaluated once; the
  // sample average is taken of the Gaussian part.
  const Vec x0 = Vec::Zero(geo.N());
  auto penalty = [&](const Vec& theta) {
    return log_gaussian(x0, k, theta, geo, sigma2) -
           log_branch_likelihood(interp, k, x0, theta, geo, sigma2, gamma_thr);
  };
  const double base_penalty = penalty(theta_k);
  std::vector<double> cand_penalty(nc);
  for (std::size_t j = 0; j < nc; ++j) cand_penalty[j] = penalty(candidates[j]);

  double sum = 0.0, sum_sq = 0.0;
  std::vector<double> dsum(nc, 0.0), dsum_sq(nc, 0.0);
  std::int64_t n = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    const Vec x = sample_observation(rng, phi, sigma2);
    if (glrt_select(x, geo, sigma2, gamma_thr) != k) continue;
    ++n;
    const double lb = log_gaussian(x, k, theta_k, geo, sigma2);
    sum += lb;
    sum_sq += lb * lb;
    for (std::size_t j = 0; j < nc; ++j) {
      const double d = lb - log_gaussian(x, k, candidates[j], geo, sigma2);
      dsum[j] += d;
      dsum_sq[j] += d * d;
    }
  }
  if (n < kMinObjectiveAccepted) {
    throw DegenerateSelection("mc_objective: only " + std::to_string(n) +
                              " samples selected k=" + std::to_string(k));
  }
  const double dn = static_cast<double>(n);
  auto se = [dn](double s, double s2) {
    const double mean = s / dn;
    const double var = std::max(0.0, (s2 - dn * mean * mean) / (dn - 1.0));
    return std::sqrt(var / dn);
  };

  ObjectiveComparison out;
  out.accepted = n;
  out.base = sum / dn - base_penalty;
  out.base_se = se(sum, sum_sq);
  out.diff.resize(nc);
  out.diff_se.resize(nc);
  for (std::size_t j = 0; j < nc; ++j) {
    out.diff[j] = dsum[j] / dn - base_penalty + cand_penalty[j];
    out.diff_se[j] = se(dsum[j], dsum_sq[j]);
  }
  return out;
}

double mc_objective(Stream& rng, std::int64_t trials, int k, const Vec& theta_k,
                    Interpretation interp, const Vec& phi, const ModelGeometry& geo,
                    double sigma2, double gamma_thr) {
  return mc_objective_compare(rng, trials, k, theta_k, {}, interp, phi, geo, sigma2, gamma_thr)
      .base;
}

}  // namespace psmcrb
