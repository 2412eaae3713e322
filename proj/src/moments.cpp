#include "psmcrb/moments.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "psmcrb/errors.hpp"

namespace psmcrb {

namespace {

void require_k(int k) {
  if (k != 1 && k != 2) throw DomainError("conditional moments: k must be 1 or 2");
}

void require_nondegenerate(int k, const SelectionTerms& t) {
  if (!(t.p(k) > kDegenerateProb)) {
    throw DegenerateSelection("selection event k=" + std::to_string(k) +
                              " has probability " + std::to_string(t.p(k)));
  }
}

}  // namespace

SelectionTerms selection_terms(const Vec& phi, const ModelGeometry& geo, double sigma2,
                               double gamma_thr) {
  const double lambda = noncentrality(phi, geo, sigma2);
  specfn::ChiSqParams{geo.r, gamma_thr, lambda}.validate();
  const auto t = specfn::NoncentralChiSq(geo.r, gamma_thr).terms(lambda);
  return {lambda, t.cdf, t.survival, t.diff1, t.diff2};
}

ConditionalMoments cond_moments(int k, const Vec& phi, const ModelGeometry& geo, double sigma2,
                                const SelectionTerms& t) {
  require_k(k);
  require_nondegenerate(k, t);
  const double sign = k == 1 ? -1.0 : 1.0;
  const double ratio1 = t.diff1 / t.p(k);
  const double ratio2 = t.diff2 / t.p(k);
  const Vec u = geo.Pperp * phi;
  const Eigen::Index N = geo.N();

  ConditionalMoments m;
  m.k = k;
  m.mu = phi + sign * ratio1 * u;
  const Mat uu = u * u.transpose();
  m.sigma = sigma2 * Mat::Identity(N, N) - sign * ratio2 * uu + sign * ratio1 * sigma2 * geo.Pperp -
            ratio1 * ratio1 * uu;
  m.sigma = 0.5 * (m.sigma + m.sigma.transpose()).eval();
  return m;
}

ConditionalMoments cond_moments(int k, const Vec& phi, const ModelGeometry& geo, double sigma2,
                                double gamma_thr) {
  return cond_moments(k, phi, geo, sigma2, selection_terms(phi, geo, sigma2, gamma_thr));
}

Vec cond_mean(int k, const Vec& phi, const ModelGeometry& geo, double sigma2, double gamma_thr) {
  return cond_moments(k, phi, geo, sigma2, gamma_thr).mu;
}

Mat cond_cov(int k, const Vec& phi, const ModelGeometry& geo, double sigma2, double gamma_thr) {
  return cond_moments(k, phi, geo, sigma2, gamma_thr).sigma;
}

McMoments mc_cond_moments(Stream& rng, std::int64_t trials, int k, const Vec& phi,
                          const ModelGeometry& geo, double sigma2, double gamma_thr) {
  require_k(k);
  if (trials < 1) throw DomainError("mc_cond_moments: trials must be >= 1");
  const Eigen::Index N = geo.N();
  std::vector<Vec> kept;
  for (std::int64_t t = 0; t < trials; ++t) {
    Vec x = sample_observation(rng, phi, sigma2);
    if (glrt_select(x, geo, sigma2, gamma_thr) == k) kept.push_back(std::move(x));
  }
  const auto n = static_cast<std::int64_t>(kept.size());
  if (n < 2) {
    throw DegenerateSelection("mc_cond_moments: only " + std::to_string(n) +
                              " samples selected k=" + std::to_string(k));
  }
  const double dn = static_cast<double>(n);

  McMoments out;
  out.accepted = n;
  out.mu_hat = Vec::Zero(N);
  for (const auto& x : kept) out.mu_hat += x;
  out.mu_hat /= dn;

  out.sigma_hat = Mat::Zero(N, N);
  for (const auto& x : kept) {
    const Vec d = x - out.mu_hat;
    out.sigma_hat += d * d.transpose();
  }
  out.sigma_hat /= dn - 1.0;
  out.mu_se = (out.sigma_hat.diagonal() / dn).cwiseSqrt();

  // Entry (i, j) is a mean of d_i d_j; its standard error comes from the
  // spread of those products.
  Mat sq = Mat::Zero(N, N);
  for (const auto& x : kept) {
    const Vec d = x - out.mu_hat;
    const Mat prod = d * d.transpose();
    sq += (prod - out.sigma_hat).cwiseAbs2();
  }
  out.sigma_se = (sq / ((dn - 1.0) * dn)).cwiseSqrt();
  return out;
}

}  // namespace psmcrb
