#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "psmcrb/errors.hpp"
#include "psmcrb/estimators.hpp"

using namespace psmcrb;

namespace {

Mat gauss(std::mt19937_64& gen, int n, int m, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Mat A(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) A(i, j) = nd(gen);
  return A;
}

// Shrinkage root from the long-double survival series alone: coarse grid to
// the leftmost sign change, then bisection. F_r - F_{r+2} = Q_{r+2} - Q_r.
long double oracle_g(long double s, long double q, int r, long double g, bool normalized) {
  const long double lam = s * s * q;
  const long double Qr = oracle::survival_even_dof(r, g, lam);
  const long double diff = oracle::survival_even_dof(r + 2, g, lam) - Qr;
  const long double den = normalized ? (1.0L - oracle::survival_even_dof(r, g, 0.0L)) + Qr : Qr;
  return s * (1.0L + diff / den) - 1.0L;
}

double oracle_root(double q, int r, double g, bool normalized) {
  const int n = 2000;
  long double a = 0, b = 0;
  long double prev_s = 1e-9L, prev = oracle_g(prev_s, q, r, g, normalized);
  for (int i = 1; i <= n; ++i) {
    const long double s = 1e-9L + (1.0L - 1e-9L) * i / n;
    const long double v = oracle_g(s, q, r, g, normalized);
    if (prev < 0 && v >= 0) {
      a = prev_s;
      b = s;
      break;
    }
    prev_s = s;
    prev = v;
  }
  REQUIRE(b > 0);
  for (int it = 0; it < 80; ++it) {
    const long double m = 0.5L * (a + b);
    (oracle_g(m, q, r, g, normalized) < 0 ? a : b) = m;
  }
  return static_cast<double>(0.5L * (a + b));
}

}  // namespace

TEST_CASE("least-squares branch estimates on a hand example") {
  Mat H(3, 1);
  H << 1, 1, 0;
  const auto geo = build_geometry(H);
  Vec x(3);
  x << 1, 3, 5;
  const auto e1 = msl(x, 1, geo);
  REQUIRE(e1.theta.size() == 1);
  CHECK(e1.theta(0) == doctest::Approx(2.0).epsilon(1e-14));
  Vec phi1(3);
  phi1 << 2, 2, 0;
  CHECK((e1.phi_hat - phi1).norm() <= 1e-14);
  const auto e2 = msl(x, 2, geo);
  CHECK((e2.theta - x).norm() == 0.0);
}

TEST_CASE("all estimators coincide on branch 1") {
  std::mt19937_64 gen(1);
  const auto geo = build_geometry(gauss(gen, 4, 2));
  for (int i = 0; i < 50; ++i) {
    const Vec x = gauss(gen, 4, 1);
    const auto a = msl(x, 1, geo), b = msnl(x, 1, geo, 1.0, 2.0), c = psml(x, 1, geo, 1.0, 2.0);
    CHECK((a.theta - b.theta).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((a.theta - c.theta).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("gamma = 0 on branch 2 returns the observation") {
  std::mt19937_64 gen(2);
  const auto geo = build_geometry(gauss(gen, 4, 2));
  for (int i = 0; i < 50; ++i) {
    const Vec x = gauss(gen, 4, 1, 3.0);
    CHECK((msnl(x, 2, geo, 1.0, 0.0).theta - x).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((psml(x, 2, geo, 1.0, 0.0).theta - x).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("scalar root against the long-double oracle") {
  for (double g : {0.5, 2.0, 8.0, 30.0})
    for (double q : {0.1, g * 1.01, 3.0 * g + 1.0, 60.0})
      for (bool normalized : {false, true}) {
        const ShrinkageProblem prob{q, 2, g, normalized ? Denominator::Normalized : Denominator::Selective};
        const double s = solve_shrinkage(prob);
        CAPTURE(g);
        CAPTURE(q);
        CAPTURE(normalized);
        CHECK(std::fabs(s - oracle_root(q, 2, g, normalized)) <= 1e-9);
        CHECK(std::fabs(s * (1 + shrinkage_coefficient(s * s * q, prob)) - 1) <= 1e-11);
      }
  CHECK(solve_shrinkage({0.0, 2, 3.0, Denominator::Selective}) == 1.0);
}

TEST_CASE("vector score residuals vanish at the estimates") {
  std::mt19937_64 gen(4);
  for (auto [n, m] : {std::pair{4, 2}, std::pair{5, 2}, std::pair{3, 1}}) {
    const auto geo = build_geometry(gauss(gen, n, m));
    for (double g : {0.1, 1.0, 3.0, 10.0, 40.0}) {
      const ShrinkageSolver solver(n - m, g);
      int checked = 0;
      for (int i = 0; i < 1000; ++i) {
        const Vec x = gauss(gen, n, 1, 1.0 + 0.01 * i);
        if (glrt_select(x, geo, 1.0, g) != 2) continue;
        ++checked;
        const double tol = 1e-9 * (1 + x.norm());
        const auto a = msnl(x, 2, geo, 1.0, solver);
        const auto b = psml(x, 2, geo, 1.0, solver);
        CHECK(score_residual(x, a.theta, geo, 1.0, g, Denominator::Normalized).norm() <= tol);
        CHECK(score_residual(x, b.theta, geo, 1.0, g, Denominator::Selective).norm() <= tol);
        // column-space component untouched, Pperp component shrunk in order
        CHECK((geo.PH * (a.theta - x)).norm() <= 1e-10 * (1 + x.norm()));
        CHECK((geo.PH * (b.theta - x)).norm() <= 1e-10 * (1 + x.norm()));
        const double nx = (geo.Pperp * x).norm();
        const double na = (geo.Pperp * a.theta).norm();
        const double nb = (geo.Pperp * b.theta).norm();
        CHECK(nb <= na + 1e-12);
        CHECK(na <= nx + 1e-12);
      }
      CHECK(checked > 0);
    }
  }
}

TEST_CASE("oracle estimator") {
  std::mt19937_64 gen(6);
  const auto geo = build_geometry(gauss(gen, 4, 2));
  const Vec x = gauss(gen, 4, 1);
  CHECK((oracle_ml(x, Hypothesis::H1, geo) - geo.PH * x).norm() <= 1e-14);
  CHECK((oracle_ml(x, Hypothesis::H2, geo) - x).norm() == 0.0);
}

TEST_CASE("branch log-likelihoods") {
  std::mt19937_64 gen(7);
  const auto geo = build_geometry(gauss(gen, 3, 1));
  const Vec x = gauss(gen, 3, 1);
  const Vec t1 = gauss(gen, 1, 1);
  const Vec t2 = gauss(gen, 3, 1);
  const double s2 = 0.6, g = 1.3;
  const double ref = -1.5 * std::log(2 * M_PI * s2) - (x - t2).squaredNorm() / (2 * s2);
  CHECK(log_gaussian(x, 2, t2, geo, s2) == doctest::Approx(ref).epsilon(1e-13));
  const double pi2 = assumed_selection_prob(2, t2, geo, s2, g);
  const double pi1min = min_assumed_selection_prob(1, 2, g);
  CHECK(log_branch_likelihood(Interpretation::Naive, 2, x, t2, geo, s2, g) == doctest::Approx(ref));
  CHECK(log_branch_likelihood(Interpretation::SelectiveInference, 2, x, t2, geo, s2, g) ==
        doctest::Approx(ref - std::log(pi2)).epsilon(1e-13));
  CHECK(log_branch_likelihood(Interpretation::Normalized, 2, x, t2, geo, s2, g) ==
        doctest::Approx(ref - std::log(pi2 + pi1min)).epsilon(1e-13));
  const double ref1 = -1.5 * std::log(2 * M_PI * s2) - (x - geo.H * t1).squaredNorm() / (2 * s2);
  CHECK(log_gaussian(x, 1, t1, geo, s2) == doctest::Approx(ref1).epsilon(1e-13));
}

TEST_CASE("assumed densities: normalized and selective integrate to one") {
  std::mt19937_64 gen(8);
  const auto geo = build_geometry(gauss(gen, 3, 1));
  const Vec t1 = gauss(gen, 1, 1);
  const Vec t2 = gauss(gen, 3, 1);
  const double s2 = 1.0, g = 1.5;
  // Importance sampling from a wide Gaussian proposal.
  const double ps = 2.5;
  std::normal_distribution<double> nd(0.0, ps);
  const long n = 400000;
  double sum[3] = {0, 0, 0}, sq[3] = {0, 0, 0};
  for (long i = 0; i < n; ++i) {
    Vec x(3);
    for (int j = 0; j < 3; ++j) x(j) = nd(gen);
    const double q = std::exp(-x.squaredNorm() / (2 * ps * ps)) / std::pow(2 * M_PI * ps * ps, 1.5);
    for (int k = 0; k < 3; ++k) {
      const double w = assumed_density(kInterpretations[k], x, t1, t2, geo, s2, g, {0.3, 0.7}) / q;
      sum[k] += w;
      sq[k] += w * w;
    }
  }
  double mean[3], se[3];
  for (int k = 0; k < 3; ++k) {
    mean[k] = sum[k] / n;
    se[k] = std::sqrt((sq[k] / n - mean[k] * mean[k]) / n);
  }
  const double pi_sum = assumed_selection_prob(1, t1, geo, s2, g) + assumed_selection_prob(2, t2, geo, s2, g);
  CHECK(std::fabs(mean[0] - pi_sum) <= 4 * se[0]);
  CHECK(std::fabs(mean[1] - 1.0) <= 4 * se[1]);
  CHECK(std::fabs(mean[2] - 1.0) <= 4 * se[2]);
}

TEST_CASE("bad inputs") {
  CHECK_THROWS_AS(solve_shrinkage({-1.0, 2, 1.0, Denominator::Selective}), DomainError);
  CHECK_THROWS_AS(solve_shrinkage({NAN, 2, 1.0, Denominator::Selective}), DomainError);
}
