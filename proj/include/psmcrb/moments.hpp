#pragma once

#include <cstdint>

#include "psmcrb/linmodel.hpp"
#include "psmcrb/specfn.hpp"

namespace psmcrb {

/// Selection events with probability at or below this are treated as null.
inline constexpr double kDegenerateProb = 1e-12;

/// The chi-square quantities every conditional formula needs at one
/// (phi, gamma): lambda = phi^T Pperp phi / sigma2, the selection
/// probabilities and the two CDF differences, all from one Poisson window.
struct SelectionTerms {
  double lambda;
  double p1;     // F_r(g; lambda)
  double p2;     // Q_r(g; lambda)
  double diff1;  // F_r - F_{r+2}
  double diff2;  // F_r - 2 F_{r+2} + F_{r+4}

  double p(int k) const { return k == 1 ? p1 : p2; }
};

SelectionTerms selection_terms(const Vec& phi, const ModelGeometry& geo, double sigma2,
                               double gamma_thr);

struct ConditionalMoments {
  int k;
  Vec mu;
  Mat sigma;
};

/// mu_k = phi + (-1)^k (diff1 / p_k) Pperp phi.
/// Throws DegenerateSelection when p_k <= 1e-12.
Vec cond_mean(int k, const Vec& phi, const ModelGeometry& geo, double sigma2, double gamma_thr);

/// Sigma_k = sigma2 I + (-1)^{k-1} (diff2/p_k) u u^T + (-1)^k (diff1/p_k) sigma2 Pperp
///           - (diff1/p_k)^2 u u^T,  u = Pperp phi.
Mat cond_cov(int k, const Vec& phi, const ModelGeometry& geo, double sigma2, double gamma_thr);

ConditionalMoments cond_moments(int k, const Vec& phi, const ModelGeometry& geo, double sigma2,
                                const SelectionTerms& terms);
ConditionalMoments cond_moments(int k, const Vec& phi, const ModelGeometry& geo, double sigma2,
                                double gamma_thr);

struct McMoments {
  Vec mu_hat;
  Mat sigma_hat;  // divisor n - 1
  Vec mu_se;
  Mat sigma_se;   // standard error of each covariance entry
  std::int64_t accepted = 0;
};

/// Rejection sampler: draws `trials` observations and keeps those selecting k.
/// Throws DegenerateSelection when fewer than two samples are accepted.
McMoments mc_cond_moments(Stream& rng, std::int64_t trials, int k, const Vec& phi,
                          const ModelGeometry& geo, double sigma2, double gamma_thr);

}  // namespace psmcrb
