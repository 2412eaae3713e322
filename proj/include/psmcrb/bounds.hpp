#pragma once

#include <array>

#include "psmcrb/moments.hpp"
#include "psmcrb/pseudotrue.hpp"

namespace psmcrb {

/// Alpha: alpha_2(theta) = F_r(g; 0) + Q_r(g; lambda(theta)).
/// Pi2:   pi_2(theta)    = Q_r(g; lambda(theta)).
enum class SelectionKind { Alpha, Pi2 };

struct LogProbDerivs {
  Vec gradient;  // (1/sigma2) (diff1/den) Pperp theta
  Mat hessian;   // Hessian of log den
};

LogProbDerivs selection_logprob_derivs(SelectionKind kind, const Vec& theta2,
                                       const ModelGeometry& geo, double sigma2, double gamma_thr);

struct InfoMatrices {
  Interpretation interpretation;
  int k;
  Mat A;
  Mat B;
  Vec evaluated_at;
};

/// Expected Hessian of the branch-k log-likelihood at vartheta:
///   k = 1: -(1/sigma2) H^T H
///   k = 2: -(1/sigma2) I, minus the Hessian of log alpha_2 or log pi_2 for
///          Normalized and SelectiveInference.
Mat hessian_fim(Interpretation interp, int k, const Vec& vartheta, const ModelGeometry& geo,
                double sigma2, double gamma_thr);

/// Conditional second moment of the branch-k score at vartheta:
///   k = 1: H^T Sigma_1 H / sigma2^2 + e e^T,   e = H^T (mu_1 - H vartheta) / sigma2
///   k = 2: Sigma_2 / sigma2^2 + e e^T,         e = mean score at vartheta
/// e vanishes at the interpretation's own pseudo-true vector.
Mat outer_fim(Interpretation interp, int k, const Vec& vartheta, const Vec& phi,
              const ModelGeometry& geo, double sigma2, double gamma_thr);

/// Condition-number guard for every inverse taken in this module.
inline constexpr double kMaxCondition = 1e12;

/// A^{-1} B A^{-1}, symmetrized. Throws NumericalError when cond(A) >= 1e12.
Mat mcrb_k(const Mat& A, const Mat& B);

struct InterpretationBound {
  Interpretation interpretation = Interpretation::Naive;
  std::array<bool, 2> branch_vanished{false, false};  // p_k < 1e-12; term set to zero
  std::array<Vec, 2> vartheta;  // empty when the branch vanished
  std::array<Mat, 2> mcrb;      // theta-space MCRB^{(k)}; empty when vanished
  std::array<Vec, 2> bias;      // phi_k(vartheta_k) - phi
  Mat total;                    // N x N
  double trace = 0.0;
  double bias_l1 = 0.0;         // |p1 bias_1 + p2 bias_2|_1
};

/// sum_k p_k (J_k^T MCRB^{(k)} J_k + b_k b_k^T) with J_1^T M J_1 = H M H^T and
/// J_2 = I.
InterpretationBound ps_mcrb(Interpretation interp, const Vec& phi, const ModelGeometry& geo,
                            double sigma2, double gamma_thr);

Mat ps_mcrb_total(Interpretation interp, const Vec& phi, const ModelGeometry& geo, double sigma2,
                  double gamma_thr);

/// sigma2 I: the CRB of the free-mean model, FIM (1/sigma2) I.
Mat oracle_crb(double sigma2, Eigen::Index N);

/// The CRB of the true model mapped to phi: sigma2 PH under H1, sigma2 I under H2.
Mat oracle_crb_for(Hypothesis truth, const ModelGeometry& geo, double sigma2);

struct ConventionalMcrb {
  Mat theta_space;  // the sandwich itself
  Mat phi_space;    // mapped to phi, with the mapping-bias outer product added
  Vec bias;         // phi(pseudo-true) - phi
};

/// Unconditioned (single-model) MCRB when model `assumed_k` is always assumed.
///   assumed_k = 1: sigma2 (H^T H)^{-1}; phi-space sigma2 PH + (Pperp phi)(Pperp phi)^T
///   assumed_k = 2: sigma2 I
ConventionalMcrb conventional_mcrb(int assumed_k, const Vec& phi, const ModelGeometry& geo,
                                   double sigma2);

struct BoundReport {
  double gamma_thr = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  std::array<InterpretationBound, 3> per;  // indexed like kInterpretations
  double oracle_crb_trace = 0.0;             // trace of sigma2 I
  double oracle_crb_true_model_trace = 0.0;  // trace of oracle_crb_for(truth)
  double conventional_mcrb1_trace = 0.0;     // phi-space, bias included
  double conventional_mcrb2_trace = 0.0;
  double anti_oracle_mcrb_trace = 0.0;  // conventional MCRB of the wrong model
  double anti_oracle_bias_l1 = 0.0;

  const InterpretationBound& of(Interpretation i) const { return per[static_cast<int>(i)]; }
};

BoundReport compute_bounds(const Vec& phi, Hypothesis truth, const ModelGeometry& geo,
                           double sigma2, double gamma_thr);

}  // namespace psmcrb
