#include "psmcrb/estimators.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <string>

#include "psmcrb/errors.hpp"

namespace psmcrb {

namespace {

constexpr double kDenomFloor = 1e-300;

}  // namespace

const char* to_string(Interpretation i) {
  switch (i) {
    case Interpretation::Naive:
      return "naive";
    case Interpretation::Normalized:
      return "normalized";
    case Interpretation::SelectiveInference:
      return "selective";
  }
  return "?";
}

ShrinkageSolver::ShrinkageSolver(int r, double gamma_thr)
    : chi_(r, gamma_thr), pi1_min_(min_assumed_selection_prob(1, r, gamma_thr)) {}

double ShrinkageSolver::coefficient(double lambda, Denominator denom) const {
  const auto t = chi_.terms(lambda);
  const double den = denom == Denominator::Normalized ? pi1_min_ + t.survival : t.survival;
  if (!(den > kDenomFloor)) {
    throw NumericalError("shrinkage coefficient: vanishing denominator at lambda=" +
                         std::to_string(lambda) + ", gamma=" + std::to_string(threshold()));
  }
  return std::max(t.diff1, 0.0) / den;
}

double ShrinkageSolver::g(double s, double q, Denominator denom) const {
  return s * (1.0 + coefficient(s * s * q, denom)) - 1.0;
}

ShrinkageSolution ShrinkageSolver::solve(double q, Denominator denom) const {
  if (!(q >= 0.0) || std::isinf(q)) throw DomainError("solve_shrinkage: q must be finite and >= 0");
  ShrinkageSolution sol;
  if (q == 0.0) return sol;

  const double g_hi = g(1.0, q, denom);
  if (g_hi == 0.0) return sol;

  std::array<double, kShrinkScanPoints> s_grid{};
  std::array<double, kShrinkScanPoints> g_grid{};
  for (int i = 0; i < kShrinkScanPoints; ++i) {
    const double s = kShrinkLower + (1.0 - kShrinkLower) * i / (kShrinkScanPoints - 1);
    s_grid[i] = s;
    g_grid[i] = i == kShrinkScanPoints - 1 ? g_hi : g(s, q, denom);
  }
  int left = -1;
  for (int i = 0; i + 1 < kShrinkScanPoints; ++i) {
    if ((g_grid[i] < 0.0) != (g_grid[i + 1] < 0.0)) {
      ++sol.sign_changes;
      if (left < 0 && g_grid[i] < 0.0) left = i;
    }
  }
  if (left < 0) {
    throw NumericalError("solve_shrinkage: no sign change on (0, 1] (q=" + std::to_string(q) + ")");
  }

  double a = s_grid[left];
  double b = s_grid[left + 1];
  double ga = g_grid[left];
  double gb = g_grid[left + 1];
  for (; sol.iterations < kShrinkMaxIter; ++sol.iterations) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double gm = g(m, q, denom);
    if (std::fabs(gm) <= kShrinkResidualStop) {
      a = b = m;
      ga = gb = gm;
      break;
    }
    if (gm < 0.0) {
      a = m;
      ga = gm;
    } else {
      b = m;
      gb = gm;
    }
  }
  if (std::fabs(ga) < std::fabs(gb)) {
    sol.s = a;
    sol.residual = std::fabs(ga);
  } else {
    sol.s = b;
    sol.residual = std::fabs(gb);
  }
  if (!(sol.residual <= kShrinkResidualMax)) {
    throw NumericalError("solve_shrinkage: residual " + std::to_string(sol.residual) +
                         " above tolerance (q=" + std::to_string(q) + ")");
  }
  return sol;
}

double shrinkage_coefficient(double lambda, const ShrinkageProblem& prob) {
  return ShrinkageSolver(prob.r, prob.gamma_thr).coefficient(lambda, prob.denom);
}

double solve_shrinkage(const ShrinkageProblem& prob) {
  return ShrinkageSolver(prob.r, prob.gamma_thr).solve(prob.q, prob.denom).s;
}

Estimate msl(const Vec& x, int k, const ModelGeometry& geo) {
  if (x.size() != geo.N()) throw DomainError("msl: x has the wrong length");
  Estimate e;
  e.k = k;
  if (k == 1) {
    e.theta = geo.Hpinv * x;
    e.phi_hat = geo.H * e.theta;
  } else if (k == 2) {
    e.theta = x;
    e.phi_hat = x;
  } else {
    throw DomainError("msl: k must be 1 or 2");
  }
  return e;
}

Vec shrink_toward_column_space(const Vec& target, const ModelGeometry& geo, double sigma2,
                               const ShrinkageSolver& solver, Denominator denom,
                               ShrinkageSolution* info) {
  const Vec perp = geo.Pperp * target;
  const double q = perp.squaredNorm() / sigma2;
  const ShrinkageSolution sol = solver.solve(q, denom);
  if (info) *info = sol;
  return Vec(geo.PH * target + sol.s * perp);
}

namespace {

Estimate shrinkage_estimate(const Vec& x, int k, const ModelGeometry& geo, double sigma2,
                            const ShrinkageSolver& solver, Denominator denom) {
  assert(glrt_select(x, geo, sigma2, solver.threshold()) == k);
  if (k != 2) return msl(x, k, geo);
  if (x.size() != geo.N()) throw DomainError("estimator: x has the wrong length");
  Estimate e;
  e.k = 2;
  e.theta = shrink_toward_column_space(x, geo, sigma2, solver, denom);
  e.phi_hat = e.theta;
  return e;
}

}  // namespace

Estimate msnl(const Vec& x, int k, const ModelGeometry& geo, double sigma2,
              const ShrinkageSolver& solver) {
  return shrinkage_estimate(x, k, geo, sigma2, solver, Denominator::Normalized);
}

Estimate msnl(const Vec& x, int k, const ModelGeometry& geo, double sigma2, double gamma_thr) {
  return msnl(x, k, geo, sigma2, ShrinkageSolver(geo.r, gamma_thr));
}

Estimate psml(const Vec& x, int k, const ModelGeometry& geo, double sigma2,
              const ShrinkageSolver& solver) {
  return shrinkage_estimate(x, k, geo, sigma2, solver, Denominator::Selective);
}

Estimate psml(const Vec& x, int k, const ModelGeometry& geo, double sigma2, double gamma_thr) {
  return psml(x, k, geo, sigma2, ShrinkageSolver(geo.r, gamma_thr));
}

Vec oracle_ml(const Vec& x, Hypothesis truth, const ModelGeometry& geo) {
  if (x.size() != geo.N()) throw DomainError("oracle_ml: x has the wrong length");
  return truth == Hypothesis::H1 ? Vec(geo.PH * x) : x;
}

Vec score_residual(const Vec& target, const Vec& theta, const ModelGeometry& geo, double sigma2,
                   double gamma_thr, Denominator denom) {
  const double lambda = noncentrality(theta, geo, sigma2);
  const double c = ShrinkageSolver(geo.r, gamma_thr).coefficient(lambda, denom);
  return target - theta - c * (geo.Pperp * theta);
}

double log_gaussian(const Vec& x, int k, const Vec& theta_k, const ModelGeometry& geo,
                    double sigma2) {
  const Vec mean = k == 1 ? Vec(geo.H * theta_k) : theta_k;
  if (mean.size() != x.size()) throw DomainError("log_gaussian: dimension mismatch");
  const double n = static_cast<double>(x.size());
  return -0.5 * n * std::log(2.0 * std::numbers::pi * sigma2) -
         0.5 * (x - mean).squaredNorm() / sigma2;
}

double log_branch_likelihood(Interpretation interp, int k, const Vec& x, const Vec& theta_k,
                             const ModelGeometry& geo, double sigma2, double gamma_thr) {
  const double base = log_gaussian(x, k, theta_k, geo, sigma2);
  switch (interp) {
    case Interpretation::Naive:
      return base;
    case Interpretation::Normalized: {
      const double own = assumed_selection_prob(k, theta_k, geo, sigma2, gamma_thr);
      const double other = min_assumed_selection_prob(k == 1 ? 2 : 1, geo.r, gamma_thr);
      return base - std::log(own + other);
    }
    case Interpretation::SelectiveInference:
      return base - std::log(assumed_selection_prob(k, theta_k, geo, sigma2, gamma_thr));
  }
  return base;
}

double assumed_density(Interpretation interp, const Vec& x, const Vec& theta1, const Vec& theta2,
                       const ModelGeometry& geo, double sigma2, double gamma_thr,
                       std::array<double, 2> weights) {
  const int k = glrt_select(x, geo, sigma2, gamma_thr);
  const Vec& theta_k = k == 1 ? theta1 : theta2;
  const double f = std::exp(log_gaussian(x, k, theta_k, geo, sigma2));
  switch (interp) {
    case Interpretation::Naive:
      return f;
    case Interpretation::Normalized: {
      const double alpha = assumed_selection_prob(1, theta1, geo, sigma2, gamma_thr) +
                           assumed_selection_prob(2, theta2, geo, sigma2, gamma_thr);
      return f / alpha;
    }
    case Interpretation::SelectiveInference: {
      if (weights[0] < 0.0 || weights[1] < 0.0 || std::fabs(weights[0] + weights[1] - 1.0) > 1e-12)
        throw DomainError("assumed_density: weights must be nonnegative and sum to one");
      return weights[k - 1] * f / assumed_selection_prob(k, theta_k, geo, sigma2, gamma_thr);
    }
  }
  return f;
}

}  // namespace psmcrb
