#include "psmcrb/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "psmcrb/bounds.hpp"
#include "psmcrb/config.hpp"
#include "psmcrb/estimators.hpp"
#include "psmcrb/moments.hpp"
#include "psmcrb/pseudotrue.hpp"

namespace psmcrb {

namespace {

using specfn::ChiSqParams;

std::string sci(double v) {
  std::ostringstream ss;
  ss.precision(3);
  ss << std::scientific << v;
  return ss.str();
}

double fd_first(const ChiSqParams& p, double h) {
  auto F = [&](double l) { return specfn::chi2_cdf_noncentral({p.r, p.gamma_thr, l}); };
  if (p.lambda >= h) return (F(p.lambda + h) - F(p.lambda - h)) / (2.0 * h);
  return (-3.0 * F(p.lambda) + 4.0 * F(p.lambda + h) - F(p.lambda + 2.0 * h)) / (2.0 * h);
}

double fd_second(const ChiSqParams& p, double h) {
  auto F = [&](double l) { return specfn::chi2_cdf_noncentral({p.r, p.gamma_thr, l}); };
  if (p.lambda >= h) return (F(p.lambda + h) - 2.0 * F(p.lambda) + F(p.lambda - h)) / (h * h);
  return (2.0 * F(p.lambda) - 5.0 * F(p.lambda + h) + 4.0 * F(p.lambda + 2.0 * h) -
          F(p.lambda + 3.0 * h)) /
         (h * h);
}

CheckResult check_dlambda(const SelfcheckOptions& opt) {
  double worst = 0.0;
  for (int r : {1, 2, 4})
    for (double g : {0.5, 2.0, 8.0})
      for (double l : {0.0, 1.0, 5.0}) {
        const ChiSqParams p{r, g, l};
        worst = std::max(worst, std::fabs(opt.dlambda(p) - fd_first(p, 1e-5)));
      }
  return {"specfn: dF/dlambda matches finite differences", worst <= 1e-7, "max error " + sci(worst)};
}

CheckResult check_d2lambda(const SelfcheckOptions& opt) {
  double worst = 0.0;
  for (int r : {1, 2, 4})
    for (double g : {0.5, 2.0, 8.0})
      for (double l : {0.0, 1.0, 5.0}) {
        const ChiSqParams p{r, g, l};
        worst = std::max(worst, std::fabs(opt.d2lambda(p) - fd_second(p, 1e-4)));
      }
  return {"specfn: d2F/dlambda2 matches finite differences", worst <= 1e-6, "max error " + sci(worst)};
}

CheckResult check_complement() {
  double worst = 0.0;
  for (int r : {1, 2, 3, 4, 7})
    for (double g = 0.0; g <= 100.0; g += 2.5)
      for (double l : {0.0, 0.5, 3.0, 20.0}) {
        const ChiSqParams p{r, g, l};
        worst = std::max(worst, std::fabs(specfn::chi2_cdf_noncentral(p) +
                                          specfn::chi2_survival_noncentral(p) - 1.0));
      }
  return {"specfn: CDF + survival = 1 up to gamma = 100", worst <= 1e-11, "max error " + sci(worst)};
}

struct Fixture {
  ExperimentConfig cfg;
  ModelGeometry geo;
  Vec phi;
};

Fixture fixture(Hypothesis h) {
  Fixture f{standard_config(h, 1), {}, {}};
  f.geo = build_geometry(f.cfg.H);
  f.phi = f.cfg.phi();
  return f;
}

CheckResult check_mixture() {
  double mean_err = 0.0, cov_err = 0.0;
  for (Hypothesis h : {Hypothesis::H1, Hypothesis::H2}) {
    const Fixture f = fixture(h);
    const double s2 = f.cfg.sigma2;
    for (double g : {0.3, 1.0, 2.0, 5.0}) {
      const SelectionTerms t = selection_terms(f.phi, f.geo, s2, g);
      const auto m1 = cond_moments(1, f.phi, f.geo, s2, t);
      const auto m2 = cond_moments(2, f.phi, f.geo, s2, t);
      mean_err = std::max(mean_err, (t.p1 * m1.mu + t.p2 * m2.mu - f.phi).cwiseAbs().maxCoeff());
      const Vec d1 = m1.mu - f.phi, d2 = m2.mu - f.phi;
      const Mat total = t.p1 * (m1.sigma + d1 * d1.transpose()) + t.p2 * (m2.sigma + d2 * d2.transpose());
      cov_err = std::max(cov_err, (total - s2 * Mat::Identity(f.geo.N(), f.geo.N())).cwiseAbs().maxCoeff());
    }
  }
  return {"moments: mixture mean and total covariance identities", mean_err <= 1e-10 && cov_err <= 1e-9,
          "mean " + sci(mean_err) + ", covariance " + sci(cov_err)};
}

CheckResult check_selection_frequency(const SelfcheckOptions& opt) {
  const Fixture f = fixture(Hypothesis::H2);
  const double lambda = noncentrality(f.phi, f.geo, f.cfg.sigma2);
  double worst_z = 0.0;
  Stream rng(opt.seed);
  for (double g : {0.5, 2.0, 6.0}) {
    const double p1 = true_selection_probs(lambda, g, f.geo.r).p1;
    std::int64_t hits = 0;
    for (std::int64_t t = 0; t < opt.trials; ++t)
      if (glrt_select(sample_observation(rng, f.phi, f.cfg.sigma2), f.geo, f.cfg.sigma2, g) == 1) ++hits;
    const double n = static_cast<double>(opt.trials);
    const double se = std::sqrt(std::max(p1 * (1.0 - p1), 1e-300) / n);
    worst_z = std::max(worst_z, std::fabs(static_cast<double>(hits) / n - p1) / se);
  }
  return {"linmodel: empirical selection frequency within 4 SE", worst_z <= 4.0,
          "max |z| " + sci(worst_z)};
}

CheckResult check_estimators(const SelfcheckOptions& opt) {
  const Fixture f = fixture(Hypothesis::H2);
  const double s2 = f.cfg.sigma2;
  Stream rng(opt.seed + 1);
  double worst_score = 0.0, worst_coincide = 0.0;
  bool ordering = true;
  for (double g : {0.0, 0.5, 2.0, 5.0}) {
    const ShrinkageSolver solver(f.geo.r, g);
    for (int t = 0; t < 200; ++t) {
      const Vec x = sample_observation(rng, f.phi, s2);
      const int k = glrt_select(x, f.geo, s2, g);
      const Estimate a = msl(x, k, f.geo);
      const Estimate b = msnl(x, k, f.geo, s2, solver);
      const Estimate c = psml(x, k, f.geo, s2, solver);
      if (k == 1 || g == 0.0) {
        worst_coincide = std::max({worst_coincide, (a.phi_hat - b.phi_hat).cwiseAbs().maxCoeff(),
                                   (a.phi_hat - c.phi_hat).cwiseAbs().maxCoeff()});
      }
      if (k == 2) {
        const double scale = 1.0 + x.norm();
        worst_score = std::max(
            {worst_score,
             score_residual(x, b.theta, f.geo, s2, g, Denominator::Normalized).norm() / scale,
             score_residual(x, c.theta, f.geo, s2, g, Denominator::Selective).norm() / scale});
        const double nc = (f.geo.Pperp * c.theta).norm();
        const double nb = (f.geo.Pperp * b.theta).norm();
        const double nx = (f.geo.Pperp * x).norm();
        if (nc > nb * (1 + 1e-12) || nb > nx * (1 + 1e-12)) ordering = false;
      }
    }
  }
  return {"estimators: score residuals, coincidences and shrinkage ordering",
          worst_score <= 1e-9 && worst_coincide <= 1e-10 && ordering,
          "score " + sci(worst_score) + ", coincidence " + sci(worst_coincide) +
              (ordering ? "" : ", ordering violated")};
}

CheckResult check_pseudotrue(const SelfcheckOptions& opt) {
  const Fixture f = fixture(Hypothesis::H2);
  const double s2 = f.cfg.sigma2;
  const double g = 2.0;
  const double residual = pt_selective_residual(f.phi, f.geo, s2, g);
  bool exact = pt_selective(2, f.phi, f.geo, s2, g) == f.phi;
  int losses = 0;
  Stream pert(opt.seed + 2);
  for (Interpretation interp : kInterpretations) {
    for (int k = 1; k <= 2; ++k) {
      const Vec vt = pseudo_true(interp, k, f.phi, f.geo, s2, g).vartheta;
      const double radius = 0.05 * (1.0 + vt.norm());
      std::vector<Vec> cands;
      for (int j = 0; j < 20; ++j) {
        const Vec dir = pert.gaussian_vector(vt.size());
        cands.push_back(vt + radius * dir.normalized());
      }
      Stream rng(opt.seed + 3);
      const auto cmp = mc_objective_compare(rng, opt.trials, k, vt, cands, interp, f.phi, f.geo, s2, g);
      for (std::size_t j = 0; j < cands.size(); ++j)
        if (cmp.diff[j] < -3.0 * cmp.diff_se[j]) ++losses;
    }
  }
  return {"pseudotrue: selective k=2 is phi; argmax beats 20 perturbations",
          exact && residual <= 1e-9 && losses == 0,
          "residual " + sci(residual) + ", losses " + std::to_string(losses)};
}

CheckResult check_bounds() {
  double b_gap = 0.0, min_eig = INFINITY, a_gap = 0.0;
  for (Hypothesis h : {Hypothesis::H1, Hypothesis::H2}) {
    const Fixture f = fixture(h);
    const double s2 = f.cfg.sigma2;
    for (double g : {0.3, 2.0, 6.0}) {
      for (int k = 1; k <= 2; ++k) {
        std::vector<Mat> Bs;
        for (Interpretation interp : kInterpretations) {
          const Vec vt = pseudo_true(interp, k, f.phi, f.geo, s2, g).vartheta;
          Bs.push_back(outer_fim(interp, k, vt, f.phi, f.geo, s2, g));
          if (k == 2 && interp != Interpretation::Naive) {
            const bool is_alpha = interp == Interpretation::Normalized;
            const auto t = specfn::NoncentralChiSq(f.geo.r, g).terms(noncentrality(vt, f.geo, s2));
            const double den = is_alpha ? specfn::chi2_cdf_central(f.geo.r, g) + t.survival : t.survival;
            const Vec u = f.geo.Pperp * vt;
            const Mat closed = -(Mat::Identity(f.geo.N(), f.geo.N()) + (t.diff1 / den) * f.geo.Pperp) / s2 +
                               (t.diff2 / den + std::pow(t.diff1 / den, 2)) * u * u.transpose() / (s2 * s2);
            a_gap = std::max(a_gap, (hessian_fim(interp, k, vt, f.geo, s2, g) - closed).cwiseAbs().maxCoeff());
          }
        }
        for (std::size_t i = 1; i < Bs.size(); ++i) b_gap = std::max(b_gap, (Bs[i] - Bs[0]).cwiseAbs().maxCoeff());
      }
      for (Interpretation interp : kInterpretations) {
        const auto ib = ps_mcrb(interp, f.phi, f.geo, s2, g);
        min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Mat>(ib.total).eigenvalues().minCoeff());
        for (int k = 0; k < 2; ++k)
          if (!ib.branch_vanished[k])
            min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Mat>(ib.mcrb[k]).eigenvalues().minCoeff());
      }
    }
  }
  return {"bounds: B identical across interpretations, A closed forms, PSD",
          b_gap <= 1e-10 && a_gap <= 1e-9 && min_eig >= -1e-8,
          "B gap " + sci(b_gap) + ", A gap " + sci(a_gap) + ", min eigenvalue " + sci(min_eig)};
}

}  // namespace

std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& options,
                                       const std::function<void(const CheckResult&)>& on_result) {
  using Check = std::function<CheckResult()>;
  const std::vector<std::pair<std::string, Check>> checks{
      {"specfn: dF/dlambda", [&] { return check_dlambda(options); }},
      {"specfn: d2F/dlambda2", [&] { return check_d2lambda(options); }},
      {"specfn: complement", [] { return check_complement(); }},
      {"linmodel: selection frequency", [&] { return check_selection_frequency(options); }},
      {"moments: mixture identities", [] { return check_mixture(); }},
      {"estimators", [&] { return check_estimators(options); }},
      {"pseudotrue", [&] { return check_pseudotrue(options); }},
      {"bounds", [] { return check_bounds(); }},
  };
  std::vector<CheckResult> results;
  for (const auto& [name, run] : checks) {
    CheckResult r;
    try {
      r = run();
    } catch (const std::exception& e) {
      r = {name, false, std::string("threw: ") + e.what()};
    }
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace psmcrb
