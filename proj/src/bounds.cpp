#include "psmcrb/bounds.hpp"

#include <cmath>
#include <string>

#include "psmcrb/errors.hpp"

namespace psmcrb {

namespace {

constexpr double kDenomFloor = 1e-300;

Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

void require_k(int k) {
  if (k != 1 && k != 2) throw DomainError("bounds: k must be 1 or 2");
}

void require_length(const Vec& v, Eigen::Index n, const char* what) {
  if (v.size() != n) throw DomainError(std::string(what) + ": vector has the wrong length");
}

}  // namespace

LogProbDerivs selection_logprob_derivs(SelectionKind kind, const Vec& theta2,
                                       const ModelGeometry& geo, double sigma2, double gamma_thr) {
  require_length(theta2, geo.N(), "selection_logprob_derivs");
  const double lambda = noncentrality(theta2, geo, sigma2);
  specfn::ChiSqParams{geo.r, gamma_thr, lambda}.validate();
  const auto t = specfn::NoncentralChiSq(geo.r, gamma_thr).terms(lambda);
  const double den =
      kind == SelectionKind::Alpha ? specfn::chi2_cdf_central(geo.r, gamma_thr) + t.survival
                                   : t.survival;
  if (!(den > kDenomFloor)) throw NumericalError("selection_logprob_derivs: vanishing denominator");

  const Vec u = geo.Pperp * theta2;
  LogProbDerivs d;
  d.gradient = (t.diff1 / den / sigma2) * u;
  // Hessian of Q_r(g; lambda(theta)): (diff1/sigma2) Pperp - (diff2/sigma2^2) u u^T.
  const Mat hess_den = (t.diff1 / sigma2) * geo.Pperp - (t.diff2 / (sigma2 * sigma2)) * u * u.transpose();
  d.hessian = symmetrize(hess_den / den - d.gradient * d.gradient.transpose());
  return d;
}

Mat hessian_fim(Interpretation interp, int k, const Vec& vartheta, const ModelGeometry& geo,
                double sigma2, double gamma_thr) {
  require_k(k);
  if (k == 1) {
    require_length(vartheta, geo.M(), "hessian_fim");
    return -(geo.H.transpose() * geo.H) / sigma2;
  }
  require_length(vartheta, geo.N(), "hessian_fim");
  const Mat base = -Mat::Identity(geo.N(), geo.N()) / sigma2;
  switch (interp) {
    case Interpretation::Naive:
      return base;
    case Interpretation::Normalized:
      return base -
             selection_logprob_derivs(SelectionKind::Alpha, vartheta, geo, sigma2, gamma_thr).hessian;
    case Interpretation::SelectiveInference:
      return base -
             selection_logprob_derivs(SelectionKind::Pi2, vartheta, geo, sigma2, gamma_thr).hessian;
  }
  return base;
}

Mat outer_fim(Interpretation interp, int k, const Vec& vartheta, const Vec& phi,
              const ModelGeometry& geo, double sigma2, double gamma_thr) {
  require_k(k);
  const ConditionalMoments cm = cond_moments(k, phi, geo, sigma2, gamma_thr);
  const double s4 = sigma2 * sigma2;
  if (k == 1) {
    require_length(vartheta, geo.M(), "outer_fim");
    const Vec e = geo.H.transpose() * (cm.mu - geo.H * vartheta) / sigma2;
    return symmetrize(geo.H.transpose() * cm.sigma * geo.H / s4 + e * e.transpose());
  }
  require_length(vartheta, geo.N(), "outer_fim");
  Vec e = (cm.mu - vartheta) / sigma2;
  if (interp == Interpretation::Normalized)
    e -= selection_logprob_derivs(SelectionKind::Alpha, vartheta, geo, sigma2, gamma_thr).gradient;
  else if (interp == Interpretation::SelectiveInference)
    e -= selection_logprob_derivs(SelectionKind::Pi2, vartheta, geo, sigma2, gamma_thr).gradient;
  return symmetrize(cm.sigma / s4 + e * e.transpose());
}

Mat mcrb_k(const Mat& A, const Mat& B) {
  if (A.rows() != A.cols() || B.rows() != A.rows() || B.cols() != A.cols())
    throw DomainError("mcrb_k: A and B must be square and of equal size");
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  const double smax = sv[0];
  const double smin = sv[sv.size() - 1];
  if (!(smin > 0.0) || !(smax / smin < kMaxCondition)) {
    throw NumericalError("mcrb_k: A is singular or ill-conditioned (condition " +
                         std::to_string(smin > 0.0 ? smax / smin : INFINITY) + ")");
  }
  const Mat Ainv = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  return symmetrize(Ainv * B * Ainv.transpose());
}

InterpretationBound ps_mcrb(Interpretation interp, const Vec& phi, const ModelGeometry& geo,
                            double sigma2, double gamma_thr) {
  require_length(phi, geo.N(), "ps_mcrb");
  const SelectionTerms t = selection_terms(phi, geo, sigma2, gamma_thr);
  const Eigen::Index N = geo.N();

  InterpretationBound out;
  out.interpretation = interp;
  out.total = Mat::Zero(N, N);
  Vec mean_bias = Vec::Zero(N);
  for (int k = 1; k <= 2; ++k) {
    const std::size_t i = static_cast<std::size_t>(k - 1);
    const double pk = t.p(k);
    if (!(pk > kDegenerateProb)) {
      out.branch_vanished[i] = true;
      continue;
    }
    const Vec vt = pseudo_true(interp, k, phi, geo, sigma2, gamma_thr).vartheta;
    const Mat A = hessian_fim(interp, k, vt, geo, sigma2, gamma_thr);
    const Mat B = outer_fim(interp, k, vt, phi, geo, sigma2, gamma_thr);
    const Mat m = mcrb_k(A, B);
    const Mat mapped = k == 1 ? Mat(geo.H * m * geo.H.transpose()) : m;
    const Vec bias = (k == 1 ? Vec(geo.H * vt) : vt) - phi;
    out.vartheta[i] = vt;
    out.mcrb[i] = m;
    out.bias[i] = bias;
    out.total += pk * (mapped + bias * bias.transpose());
    mean_bias += pk * bias;
  }
  out.total = symmetrize(out.total);
  out.trace = out.total.trace();
  out.bias_l1 = mean_bias.lpNorm<1>();
  return out;
}

Mat ps_mcrb_total(Interpretation interp, const Vec& phi, const ModelGeometry& geo, double sigma2,
                  double gamma_thr) {
  return ps_mcrb(interp, phi, geo, sigma2, gamma_thr).total;
}

Mat oracle_crb(double sigma2, Eigen::Index N) { return sigma2 * Mat::Identity(N, N); }

Mat oracle_crb_for(Hypothesis truth, const ModelGeometry& geo, double sigma2) {
  return truth == Hypothesis::H1 ? Mat(sigma2 * geo.PH) : oracle_crb(sigma2, geo.N());
}

ConventionalMcrb conventional_mcrb(int assumed_k, const Vec& phi, const ModelGeometry& geo,
                                   double sigma2) {
  require_k(assumed_k);
  require_length(phi, geo.N(), "conventional_mcrb");
  ConventionalMcrb out;
  if (assumed_k == 2) {
    out.theta_space = oracle_crb(sigma2, geo.N());
    out.phi_space = out.theta_space;
    out.bias = Vec::Zero(geo.N());
    return out;
  }
  const Mat gram = geo.H.transpose() * geo.H;
  const Mat A = -gram / sigma2;
  const Mat B = gram / sigma2;
  out.theta_space = mcrb_k(A, B);
  out.bias = geo.PH * phi - phi;
  out.phi_space = symmetrize(geo.H * out.theta_space * geo.H.transpose() +
                             out.bias * out.bias.transpose());
  return out;
}

BoundReport compute_bounds(const Vec& phi, Hypothesis truth, const ModelGeometry& geo,
                           double sigma2, double gamma_thr) {
  const SelectionTerms t = selection_terms(phi, geo, sigma2, gamma_thr);
  BoundReport rep;
  rep.gamma_thr = gamma_thr;
  rep.p1 = t.p1;
  rep.p2 = t.p2;
  for (std::size_t i = 0; i < kInterpretations.size(); ++i)
    rep.per[i] = ps_mcrb(kInterpretations[i], phi, geo, sigma2, gamma_thr);
  rep.oracle_crb_trace = oracle_crb(sigma2, geo.N()).trace();
  rep.oracle_crb_true_model_trace = oracle_crb_for(truth, geo, sigma2).trace();
  const ConventionalMcrb c1 = conventional_mcrb(1, phi, geo, sigma2);
  const ConventionalMcrb c2 = conventional_mcrb(2, phi, geo, sigma2);
  rep.conventional_mcrb1_trace = c1.phi_space.trace();
  rep.conventional_mcrb2_trace = c2.phi_space.trace();
  const ConventionalMcrb& anti = truth == Hypothesis::H1 ? c2 : c1;
  rep.anti_oracle_mcrb_trace = anti.phi_space.trace();
  rep.anti_oracle_bias_l1 = anti.bias.lpNorm<1>();
  return rep;
}

}  // namespace psmcrb
