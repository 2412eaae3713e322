#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "psmcrb/bounds.hpp"
#include "psmcrb/errors.hpp"

using namespace psmcrb;

namespace {

struct Setup {
  ModelGeometry geo;
  Vec phi;
  double s2;
};

Setup make(std::uint64_t seed, bool h1, double s2 = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Mat H(4, 2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) H(i, j) = nd(gen);
  Setup s{build_geometry(H), Vec(4), s2};
  if (h1) {
    Vec t(2);
    t << nd(gen), nd(gen);
    s.phi = H * t;
  } else {
    for (int i = 0; i < 4; ++i) s.phi(i) = 1.2 * nd(gen);
  }
  return s;
}

// Chi-square quantities for r = 2 from the long-double survival series.
struct Terms {
  double F0, F, D, E;  // F_r(g;0), F_r(g;l), F_r - F_{r+2}, F_r - 2F_{r+2} + F_{r+4}
};

Terms terms_r2(double g, double lam) {
  const long double Q2 = oracle::survival_even_dof(2, g, lam);
  const long double Q4 = oracle::survival_even_dof(4, g, lam);
  const long double Q6 = oracle::survival_even_dof(6, g, lam);
  return {static_cast<double>(1 - oracle::survival_even_dof(2, g, 0)), static_cast<double>(1 - Q2),
          static_cast<double>(Q4 - Q2), static_cast<double>(-Q2 + 2 * Q4 - Q6)};
}

// Closed-form A for branch 2 with den = F(g;0) + 1 - F (normalized) or 1 - F (selective).
Mat closed_form_A2(const Vec& v, const Setup& s, double g, bool normalized) {
  const double lam = v.dot(s.geo.Pperp * v) / s.s2;
  const auto t = terms_r2(g, lam);
  const double den = normalized ? t.F0 + 1 - t.F : 1 - t.F;
  const Vec u = s.geo.Pperp * v;
  const Mat I = Mat::Identity(4, 4);
  return -(1 / s.s2) * (I + t.D / den * s.geo.Pperp) +
         (1 / (s.s2 * s.s2)) * (t.E / den + (t.D / den) * (t.D / den)) * u * u.transpose();
}

// Independent conditional covariance for branch k, r = 2.
Mat closed_form_sigma(int k, const Setup& s, double g) {
  const double lam = s.phi.dot(s.geo.Pperp * s.phi) / s.s2;
  const auto t = terms_r2(g, lam);
  const double p = k == 1 ? t.F : 1 - t.F;
  const double sg = k == 1 ? -1.0 : 1.0;
  const Vec u = s.geo.Pperp * s.phi;
  return s.s2 * Mat::Identity(4, 4) - sg * (t.E / p) * u * u.transpose() +
         sg * (t.D / p) * s.s2 * s.geo.Pperp - (t.D / p) * (t.D / p) * u * u.transpose();
}

Mat sandwich(const Mat& A, const Mat& B) {
  const Eigen::FullPivLU<Mat> lu(A);
  const Mat X = lu.solve(B);                   // A^{-1} B
  return lu.solve(X.transpose()).transpose();  // (A^{-1} (A^{-1} B)^T)^T = A^{-1} B A^{-1}
}

double min_eig(const Mat& M) {
  return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (M + M.transpose())).eigenvalues().minCoeff();
}

double log_den(SelectionKind kind, const Vec& t, const Setup& s, double g) {
  const double lam = t.dot(s.geo.Pperp * t) / s.s2;
  const double q = specfn::chi2_survival_noncentral({2, g, lam});
  return std::log(kind == SelectionKind::Alpha ? specfn::chi2_cdf_central(2, g) + q : q);
}

}  // namespace

TEST_CASE("log selection-probability derivatives against finite differences") {
  const auto s = make(1, false);
  const double h = 1e-5;
  for (auto kind : {SelectionKind::Alpha, SelectionKind::Pi2})
    for (double g : {0.5, 2.0, 6.0}) {
      const Vec t = s.phi;
      const auto d = selection_logprob_derivs(kind, t, s.geo, s.s2, g);
      for (int i = 0; i < 4; ++i) {
        Vec e = Vec::Zero(4);
        e(i) = h;
        const double fd = (log_den(kind, t + e, s, g) - log_den(kind, t - e, s, g)) / (2 * h);
        CHECK(std::fabs(d.gradient(i) - fd) <= 1e-6);
        for (int j = 0; j < 4; ++j) {
          Vec f = Vec::Zero(4);
          f(j) = h;
          const double fd2 = (log_den(kind, t + e + f, s, g) - log_den(kind, t + e - f, s, g) -
                              log_den(kind, t - e + f, s, g) + log_den(kind, t - e - f, s, g)) /
                             (4 * h * h);
          CHECK(std::fabs(d.hessian(i, j) - fd2) <= 1e-4);
        }
      }
    }
}

TEST_CASE("derivative edge cases") {
  const auto h1 = make(2, true);
  const auto d = selection_logprob_derivs(SelectionKind::Pi2, h1.phi, h1.geo, 1.0, 2.0);
  CHECK(d.gradient.norm() <= 1e-12);
  const auto s = make(3, false);
  for (auto kind : {SelectionKind::Alpha, SelectionKind::Pi2}) {
    const auto z = selection_logprob_derivs(kind, s.phi, s.geo, 1.0, 0.0);
    CHECK(z.gradient.norm() == 0.0);
    CHECK(z.hessian.norm() == 0.0);
  }
}

TEST_CASE("Hessian-form information against the closed forms") {
  const auto s = make(4, false, 0.8);
  for (double g : {0.5, 2.0, 6.0}) {
    for (auto i : kInterpretations) {
      const Mat A1 = hessian_fim(i, 1, pt_naive(1, s.phi, s.geo, s.s2, g), s.geo, s.s2, g);
      CHECK((A1 + s.geo.H.transpose() * s.geo.H / s.s2).cwiseAbs().maxCoeff() <= 1e-12);
    }
    const Mat An = hessian_fim(Interpretation::Naive, 2, pt_naive(2, s.phi, s.geo, s.s2, g), s.geo, s.s2, g);
    CHECK((An + Mat::Identity(4, 4) / s.s2).cwiseAbs().maxCoeff() <= 1e-14);
    const Vec v2 = pt_normalized(2, s.phi, s.geo, s.s2, g);
    CHECK((hessian_fim(Interpretation::Normalized, 2, v2, s.geo, s.s2, g) - closed_form_A2(v2, s, g, true))
              .cwiseAbs()
              .maxCoeff() <= 1e-9);
    CHECK((hessian_fim(Interpretation::SelectiveInference, 2, s.phi, s.geo, s.s2, g) -
           closed_form_A2(s.phi, s, g, false))
              .cwiseAbs()
              .maxCoeff() <= 1e-9);
  }
}

TEST_CASE("outer-product information") {
  const auto s = make(5, false);
  const double g = 2.0;
  for (int k : {1, 2}) {
    Mat B[3];
    for (int i = 0; i < 3; ++i) {
      const auto interp = kInterpretations[i];
      B[i] = outer_fim(interp, k, pseudo_true(interp, k, s.phi, s.geo, 1.0, g).vartheta, s.phi, s.geo, 1.0, g);
      CHECK((B[i] - B[i].transpose()).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(min_eig(B[i]) >= -1e-10);
    }
    CHECK((B[0] - B[1]).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((B[0] - B[2]).cwiseAbs().maxCoeff() <= 1e-10);
    const Mat sig = closed_form_sigma(k, s, g);
    const Mat expect = k == 1 ? Mat(s.geo.H.transpose() * sig * s.geo.H) : sig;
    CHECK((B[0] - expect).cwiseAbs().maxCoeff() <= 1e-10);
  }
  const Mat B0 = outer_fim(Interpretation::SelectiveInference, 2, s.phi, s.phi, s.geo, 2.0, 0.0);
  CHECK((B0 - 0.5 * Mat::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("outer-product information against a Monte-Carlo score covariance") {
  const auto s = make(6, false);
  const double g = 1.5;
  const Vec v = pt_naive(1, s.phi, s.geo, 1.0, g);
  std::mt19937_64 gen(61);
  std::normal_distribution<double> nd;
  Mat acc = Mat::Zero(2, 2), acc2 = Mat::Zero(2, 2);
  long n = 0;
  for (long i = 0; i < 300000; ++i) {
    Vec x = s.phi;
    for (int j = 0; j < 4; ++j) x(j) += nd(gen);
    if ((s.geo.Pperp * x).squaredNorm() > g) continue;
    const Vec sc = s.geo.H.transpose() * (x - s.geo.H * v);
    const Mat o = sc * sc.transpose();
    acc += o;
    acc2 += o.cwiseAbs2();
    ++n;
  }
  const Mat mean = acc / n;
  const Mat se = ((acc2 / n - mean.cwiseAbs2()) / n).cwiseSqrt();
  const Mat B = outer_fim(Interpretation::Naive, 1, v, s.phi, s.geo, 1.0, g);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::fabs(B(i, j) - mean(i, j)) <= 4 * se(i, j));
}

TEST_CASE("sandwich") {
  const Mat A = -0.5 * Mat::Identity(3, 3);
  const Mat B = 0.5 * Mat::Identity(3, 3);
  CHECK((mcrb_k(A, B) - 2.0 * Mat::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  Mat R(4, 4), S(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      R(i, j) = nd(gen);
      S(i, j) = nd(gen);
    }
  const Mat Aneg = -(R * R.transpose() + Mat::Identity(4, 4));
  const Mat Bpsd = S * S.transpose();
  CHECK((mcrb_k(Aneg, Bpsd) - sandwich(Aneg, Bpsd)).cwiseAbs().maxCoeff() <= 1e-10);
  Mat sing = Mat::Identity(3, 3);
  sing(2, 2) = 1e-14;
  CHECK_THROWS_AS(mcrb_k(sing, B), NumericalError);
}

TEST_CASE("total bound: term-by-term assembly") {
  const auto s = make(8, false);
  for (double g : {0.7, 2.5}) {
    const double lam = s.phi.dot(s.geo.Pperp * s.phi);
    const auto t = terms_r2(g, lam);
    const double p[2] = {t.F, 1 - t.F};
    const Mat& H = s.geo.H;
    const Mat HtH = H.transpose() * H;
    for (auto interp : kInterpretations) {
      // branch 1: e = 0 at vartheta_1 = Hpinv mu_1
      const Vec v1 = pt_naive(1, s.phi, s.geo, 1.0, g);
      const Mat M1 = sandwich(-HtH, H.transpose() * closed_form_sigma(1, s, g) * H);
      const Vec b1 = H * v1 - s.phi;
      Vec v2;
      Mat A2;
      switch (interp) {
        case Interpretation::Naive:
          v2 = pt_naive(2, s.phi, s.geo, 1.0, g);
          A2 = -Mat::Identity(4, 4);
          break;
        case Interpretation::Normalized:
          v2 = pt_normalized(2, s.phi, s.geo, 1.0, g);
          A2 = closed_form_A2(v2, s, g, true);
          break;
        case Interpretation::SelectiveInference:
          v2 = s.phi;
          A2 = closed_form_A2(v2, s, g, false);
          break;
      }
      const Mat M2 = sandwich(A2, closed_form_sigma(2, s, g));
      const Vec b2 = v2 - s.phi;
      const Mat expect = p[0] * (H * M1 * H.transpose() + b1 * b1.transpose()) + p[1] * (M2 + b2 * b2.transpose());
      const auto got = ps_mcrb(interp, s.phi, s.geo, 1.0, g);
      CAPTURE(to_string(interp));
      CHECK((got.total - expect).cwiseAbs().maxCoeff() <= 1e-8);
      CHECK(got.trace == doctest::Approx(expect.trace()).epsilon(1e-10));
      CHECK(min_eig(got.total) >= -1e-8);
      CHECK(min_eig(got.mcrb[0]) >= -1e-8);
      CHECK(min_eig(got.mcrb[1]) >= -1e-8);
      CHECK(got.bias_l1 == doctest::Approx((p[0] * b1 + p[1] * b2).cwiseAbs().sum()).epsilon(1e-9));
    }
  }
}

TEST_CASE("misspecification signature: A != -B for the naive branch 2") {
  const auto s = make(9, false);
  const double g = 2.0;
  const Vec v = pt_naive(2, s.phi, s.geo, 1.0, g);
  const Mat A = hessian_fim(Interpretation::Naive, 2, v, s.geo, 1.0, g);
  const Mat B = outer_fim(Interpretation::Naive, 2, v, s.phi, s.geo, 1.0, g);
  CHECK((A + B).cwiseAbs().trace() > 1e-6);
}

TEST_CASE("extreme thresholds") {
  const auto h1 = make(10, true);
  const double big = 80.0;
  const auto r = compute_bounds(h1.phi, Hypothesis::H1, h1.geo, 1.3, big);
  REQUIRE(r.p1 > 1 - 1e-10);
  for (auto i : kInterpretations) {
    CHECK(r.of(i).branch_vanished[1]);
    CHECK(r.of(i).trace == doctest::Approx(1.3 * 2).epsilon(1e-8));
  }
  CHECK(r.oracle_crb_true_model_trace == doctest::Approx(2.6));
  CHECK(r.oracle_crb_trace == doctest::Approx(5.2));

  const auto h2 = make(11, false);
  const auto z = compute_bounds(h2.phi, Hypothesis::H2, h2.geo, 1.0, 1e-12);
  REQUIRE(z.p2 > 1 - 1e-10);
  for (auto i : kInterpretations) CHECK(std::fabs(z.of(i).trace - z.conventional_mcrb2_trace) <= 1e-6);
  const auto z0 = ps_mcrb(Interpretation::SelectiveInference, h2.phi, h2.geo, 1.0, 0.0);
  CHECK(z0.branch_vanished[0]);
  CHECK(z0.bias[1].norm() == 0.0);
  CHECK((z0.total - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("oracle and conventional bounds") {
  CHECK(oracle_crb(1.0, 4).trace() == 4.0);
  CHECK(oracle_crb(2.0, 4).trace() == 8.0);
  const auto h1 = make(12, true);
  CHECK(oracle_crb_for(Hypothesis::H1, h1.geo, 1.0).trace() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(oracle_crb_for(Hypothesis::H2, h1.geo, 1.0).trace() == 4.0);
  CHECK((conventional_mcrb(2, h1.phi, h1.geo, 1.0).phi_space - Mat::Identity(4, 4)).norm() == 0.0);
  CHECK(conventional_mcrb(1, h1.phi, h1.geo, 1.0).phi_space.trace() == doctest::Approx(2.0).epsilon(1e-12));

  const auto s = make(13, false);
  const auto c = conventional_mcrb(1, s.phi, s.geo, 1.0);
  std::mt19937_64 gen(131);
  std::normal_distribution<double> nd;
  const long n = 200000;
  double sum = 0, sq = 0;
  for (long i = 0; i < n; ++i) {
    Vec x = s.phi;
    for (int j = 0; j < 4; ++j) x(j) += nd(gen);
    const double e = (s.geo.PH * x - s.phi).squaredNorm();
    sum += e;
    sq += e * e;
  }
  const double mean = sum / n, se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::fabs(c.phi_space.trace() - mean) <= 4 * se);
  CHECK((c.theta_space - (s.geo.H.transpose() * s.geo.H).inverse()).cwiseAbs().maxCoeff() <= 1e-10);
}
