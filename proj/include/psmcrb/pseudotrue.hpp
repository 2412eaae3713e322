#pragma once

#include <cstdint>
#include <vector>

#include "psmcrb/estimators.hpp"
#include "psmcrb/moments.hpp"

namespace psmcrb {

struct PseudoTrue {
  Interpretation interpretation;
  int k;
  Vec vartheta;  // length M for k = 1, N for k = 2
};

/// k = 1: Hpinv mu_1.  k = 2: mu_2.
Vec pt_naive(int k, const Vec& phi, const ModelGeometry& geo, double sigma2, double gamma_thr);

/// k = 1: as pt_naive.  k = 2: root of mu_2 - theta - (diff1/alpha) Pperp theta,
/// found with the same projection-split solve as the MSNL estimate.
Vec pt_normalized(int k, const Vec& phi, const ModelGeometry& geo, double sigma2, double gamma_thr);

/// k = 1: as pt_naive.  k = 2: phi, returned exactly.
Vec pt_selective(int k, const Vec& phi, const ModelGeometry& geo, double sigma2, double gamma_thr);

PseudoTrue pseudo_true(Interpretation interp, int k, const Vec& phi, const ModelGeometry& geo,
                       double sigma2, double gamma_thr);

/// Norm of mu_2 - phi - (diff1/Q_r) Pperp phi, the Selective k = 2 score at
/// theta = phi. Should vanish to rounding.
double pt_selective_residual(const Vec& phi, const ModelGeometry& geo, double sigma2,
                             double gamma_thr);

struct ObjectiveComparison {
  double base = 0.0;     // objective at theta_k
  double base_se = 0.0;
  std::vector<double> diff;     // objective(theta_k) - objective(candidate_j)
  std::vector<double> diff_se;  // paired standard error of each difference
  std::int64_t accepted = 0;
};

/// Minimum number of accepted samples for an objective estimate.
inline constexpr std::int64_t kMinObjectiveAccepted = 1000;

/// Rejection-sampled E[log-likelihood | selection = k] under an interpretation,
/// evaluated at theta_k and at every candidate on the same samples.
/// Throws DegenerateSelection when fewer than 1000 samples select k.
ObjectiveComparison mc_objective_compare(Stream& rng, std::int64_t trials, int k,
                                         const Vec& theta_k, const std::vector<Vec>& candidates,
                                         Interpretation interp, const Vec& phi,
                                         const ModelGeometry& geo, double sigma2,
                                         double gamma_thr);

double mc_objective(Stream& rng, std::int64_t trials, int k, const Vec& theta_k,
                    Interpretation interp, const Vec& phi, const ModelGeometry& geo,
                    double sigma2, double gamma_thr);

}  // namespace psmcrb
