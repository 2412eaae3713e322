#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "psmcrb/rng.hpp"

namespace psmcrb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Hypothesis { H1, H2 };

const char* to_string(Hypothesis h);

/// Full description of one experiment: x = phi + w, w ~ N(0, sigma2 I), with
/// phi = H theta1 under H1 and phi = theta2 under H2.
struct ExperimentConfig {
  Mat H;
  double sigma2 = 1.0;
  Hypothesis true_hypothesis = Hypothesis::H1;
  Vec theta1_true;
  Vec theta2_true;
  std::vector<double> gamma_grid;
  std::int64_t trials = 100000;
  std::uint64_t master_seed = 0;

  /// Throws ConfigError naming the offending key.
  void validate() const;

  Vec phi() const;
};

struct ModelGeometry {
  Mat H;
  Mat Hpinv;  // (H^T H)^{-1} H^T
  Mat PH;     // H (H^T H)^{-1} H^T
  Mat Pperp;  // I - PH
  int r = 0;  // N - M

  Eigen::Index N() const { return H.rows(); }
  Eigen::Index M() const { return H.cols(); }
};

/// Rank threshold: smallest singular value must exceed this times the largest.
inline constexpr double kRankTolerance = 1e-10;

/// Throws DomainError when H is not N x M with 1 <= M < N and full column rank.
ModelGeometry build_geometry(const Mat& H);

/// x^T Pperp x / sigma2.
double glrt_statistic(const Vec& x, const ModelGeometry& geo, double sigma2);

/// 1 when the statistic is <= gamma_thr (ties go to 1), 2 otherwise.
int glrt_select(const Vec& x, const ModelGeometry& geo, double sigma2, double gamma_thr);

/// v^T Pperp v / sigma2.
double noncentrality(const Vec& v, const ModelGeometry& geo, double sigma2);

struct SelectionProbs {
  double p1;
  double p2;
};

/// p1 = F_r(g; lambda), p2 = Q_r(g; lambda) (from the upper tail, not 1 - p1).
SelectionProbs true_selection_probs(double lambda, double gamma_thr, int r);

/// pi_1 = F_r(g; 0) whatever theta1 is; pi_2 = Q_r(g; lambda(theta2)).
double assumed_selection_prob(int k, const Vec& theta_k, const ModelGeometry& geo,
                              double sigma2, double gamma_thr);

/// Infimum of pi_k over its own parameter. pi_k depends on theta only through
/// lambda >= 0, so the minimum is taken over lambda numerically.
double min_assumed_selection_prob(int k, int r, double gamma_thr);

Vec sample_observation(Stream& rng, const Vec& phi, double sigma2);

/// Standard-Gaussian N x M matrix drawn from Stream(seed), row-major order.
/// Throws DomainError if the draw is rank deficient; no silent redraw.
Mat generate_channel(std::uint64_t seed, Eigen::Index N, Eigen::Index M);

/// Standard-Gaussian vector drawn from Stream(seed).
Vec generate_gaussian_vector(std::uint64_t seed, Eigen::Index n);

/// 1 <= count points evenly spaced in log10 between lo and hi inclusive.
std::vector<double> log_grid(double lo, double hi, int count);

}  // namespace psmcrb
