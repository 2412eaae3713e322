#pragma once

#include <array>

#include "psmcrb/linmodel.hpp"
#include "psmcrb/specfn.hpp"

namespace psmcrb {

/// Which assumed pdf drives an estimator, pseudo-true vector or bound.
///   Naive:              f_I,   the selected model's pdf, unnormalized.
///   Normalized:         f_II,  f_I divided by alpha = pi_k + sum of the other
///                              branches' minimal selection probabilities.
///   SelectiveInference: f_III, per-branch pdf conditioned on the selection
///                              event, f(x; theta_k) / pi_k(theta_k).
enum class Interpretation { Naive, Normalized, SelectiveInference };

inline constexpr std::array<Interpretation, 3> kInterpretations{
    Interpretation::Naive, Interpretation::Normalized, Interpretation::SelectiveInference};

const char* to_string(Interpretation i);

/// Denominator of the shrinkage coefficient in the k = 2 score equation.
///   Normalized: F_r(g; 0) + Q_r(g; lambda)   (alpha_2)
///   Selective:  Q_r(g; lambda)               (pi_2)
enum class Denominator { Normalized, Selective };

struct ShrinkageProblem {
  double q = 0.0;  // |Pperp x|^2 / sigma2
  int r = 1;
  double gamma_thr = 0.0;
  Denominator denom = Denominator::Selective;
};

struct Estimate {
  int k = 1;
  Vec theta;    // length M for k = 1, N for k = 2
  Vec phi_hat;  // H theta for k = 1, theta for k = 2
};

/// Bisection stops once |g(s)| <= this, or when the bracket can no longer be
/// split in double precision.
inline constexpr double kShrinkResidualStop = 1e-13;
/// Largest residual accepted from the scalar solve.
inline constexpr double kShrinkResidualMax = 1e-11;
inline constexpr double kShrinkLower = 1e-9;
inline constexpr int kShrinkMaxIter = 200;
inline constexpr int kShrinkScanPoints = 16;

struct ShrinkageSolution {
  double s = 1.0;
  double residual = 0.0;  // |s (1 + c(s^2 q)) - 1|
  int sign_changes = 0;   // seen by the coarse scan; > 1 flags a non-unique root
  int iterations = 0;
};

/// Shrinkage coefficient and scalar solver at fixed (r, gamma). Holds the
/// tabulated chi-square family so a Monte-Carlo sweep builds it once per
/// threshold. Immutable after construction; safe to share across threads.
class ShrinkageSolver {
 public:
  ShrinkageSolver(int r, double gamma_thr);

  int dof() const { return chi_.dof(); }
  double threshold() const { return chi_.threshold(); }
  const specfn::NoncentralChiSq& chi() const { return chi_; }

  /// Minimal pi_1, i.e. F_r(g; 0); the constant part of alpha_2.
  double pi1_min() const { return pi1_min_; }

  /// c(lambda) = (F_r - F_{r+2}) / denom(lambda) >= 0.
  /// Throws NumericalError when the denominator is below 1e-300.
  double coefficient(double lambda, Denominator denom) const;

  /// Root of g(s) = s (1 + c(s^2 q)) - 1 on (0, 1]. The leftmost sign change
  /// of a coarse scan is refined by bisection. q = 0 or c == 0 gives s = 1.
  ShrinkageSolution solve(double q, Denominator denom) const;

 private:
  double g(double s, double q, Denominator denom) const;

  specfn::NoncentralChiSq chi_;
  double pi1_min_;
};

double shrinkage_coefficient(double lambda, const ShrinkageProblem& prob);
double solve_shrinkage(const ShrinkageProblem& prob);

Estimate msl(const Vec& x, int k, const ModelGeometry& geo);

Estimate msnl(const Vec& x, int k, const ModelGeometry& geo, double sigma2,
              const ShrinkageSolver& solver);
Estimate msnl(const Vec& x, int k, const ModelGeometry& geo, double sigma2, double gamma_thr);

Estimate psml(const Vec& x, int k, const ModelGeometry& geo, double sigma2,
              const ShrinkageSolver& solver);
Estimate psml(const Vec& x, int k, const ModelGeometry& geo, double sigma2, double gamma_thr);

/// theta = PH x + s Pperp x with s from the scalar solve for `target`.
/// Shared by the k = 2 estimators and the Normalized pseudo-true vector.
Vec shrink_toward_column_space(const Vec& target, const ModelGeometry& geo, double sigma2,
                               const ShrinkageSolver& solver, Denominator denom,
                               ShrinkageSolution* info = nullptr);

/// P_H x under H1, x under H2.
Vec oracle_ml(const Vec& x, Hypothesis truth, const ModelGeometry& geo);

/// Vector score residual target - theta - c(lambda(theta)) Pperp theta.
/// Zero at the MSNL (Normalized) or PSML (Selective) estimate when target = x.
Vec score_residual(const Vec& target, const Vec& theta, const ModelGeometry& geo, double sigma2,
                   double gamma_thr, Denominator denom);

/// Gaussian log-density log f(x; theta_k) of branch k (mean H theta_1 or theta_2).
double log_gaussian(const Vec& x, int k, const Vec& theta_k, const ModelGeometry& geo,
                    double sigma2);

/// Branch-k log-likelihood under an interpretation, excluding the selection
/// indicator: log f(x; theta_k) - log(penalty), where the penalty is 1
/// (Naive), alpha_k (Normalized) or pi_k (SelectiveInference).
double log_branch_likelihood(Interpretation interp, int k, const Vec& x, const Vec& theta_k,
                             const ModelGeometry& geo, double sigma2, double gamma_thr);

/// Full assumed density over the observation space at (theta1, theta2).
/// Selective weights c = (c1, c2) must satisfy c_k >= 0, c1 + c2 = 1.
double assumed_density(Interpretation interp, const Vec& x, const Vec& theta1, const Vec& theta2,
                       const ModelGeometry& geo, double sigma2, double gamma_thr,
                       std::array<double, 2> weights = {0.5, 0.5});

}  // namespace psmcrb
