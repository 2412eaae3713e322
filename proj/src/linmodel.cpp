#include "psmcrb/linmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psmcrb/errors.hpp"
#include "psmcrb/specfn.hpp"

namespace psmcrb {

namespace {

void check_length(const Vec& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    throw DomainError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                      std::to_string(v.size()));
  }
}

}  // namespace

const char* to_string(Hypothesis h) { return h == Hypothesis::H1 ? "H1" : "H2"; }

void ExperimentConfig::validate() const {
  if (H.rows() < 2 || H.cols() < 1 || H.cols() >= H.rows())
    throw ConfigError("H", "H must be N x M with 1 <= M < N");
  try {
    build_geometry(H);
  } catch (const DomainError& e) {
    throw ConfigError("H", e.what());
  }
  if (!(sigma2 > 0.0) || std::isinf(sigma2)) throw ConfigError("sigma2", "sigma2 must be > 0");
  if (true_hypothesis == Hypothesis::H1) {
    if (theta1_true.size() != H.cols())
      throw ConfigError("theta1", "theta1 must have length M = " + std::to_string(H.cols()));
    if (!theta1_true.allFinite()) throw ConfigError("theta1", "theta1 must be finite");
  } else {
    if (theta2_true.size() != H.rows())
      throw ConfigError("theta2", "theta2 must have length N = " + std::to_string(H.rows()));
    if (!theta2_true.allFinite()) throw ConfigError("theta2", "theta2 must be finite");
  }
  if (gamma_grid.empty()) throw ConfigError("gamma_grid", "gamma_grid must not be empty");
  for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
    const double g = gamma_grid[i];
    if (!(g >= 0.0) || std::isinf(g))
      throw ConfigError("gamma_grid", "thresholds must be finite and >= 0");
    if (i > 0 && !(g > gamma_grid[i - 1]))
      throw ConfigError("gamma_grid", "gamma_grid must be strictly ascending");
  }
  if (trials < 1) throw ConfigError("trials", "trials must be >= 1");
}

Vec ExperimentConfig::phi() const {
  return true_hypothesis == Hypothesis::H1 ? Vec(H * theta1_true) : theta2_true;
}

ModelGeometry build_geometry(const Mat& H) {
  const Eigen::Index N = H.rows();
  const Eigen::Index M = H.cols();
  if (M < 1 || M >= N) throw DomainError("build_geometry: H must be N x M with 1 <= M < N");
  if (!H.allFinite()) throw DomainError("build_geometry: H has non-finite entries");

  Eigen::JacobiSVD<Mat> svd(H);
  const auto& sv = svd.singularValues();
  if (!(sv[M - 1] > kRankTolerance * sv[0])) {
    throw DomainError("build_geometry: H is rank deficient (smallest/largest singular value " +
                      std::to_string(sv[M - 1] / sv[0]) + ")");
  }

  ModelGeometry geo;
  geo.H = H;
  const Mat gram = H.transpose() * H;
  geo.Hpinv = gram.ldlt().solve(H.transpose());
  geo.PH = H * geo.Hpinv;
  geo.PH = 0.5 * (geo.PH + geo.PH.transpose()).eval();
  geo.Pperp = Mat::Identity(N, N) - geo.PH;
  geo.r = static_cast<int>(N - M);
  return geo;
}

double glrt_statistic(const Vec& x, const ModelGeometry& geo, double sigma2) {
  check_length(x, geo.N(), "glrt_statistic");
  // Pperp is idempotent, so x^T Pperp x = |Pperp x|^2, which is never negative.
  return (geo.Pperp * x).squaredNorm() / sigma2;
}

int glrt_select(const Vec& x, const ModelGeometry& geo, double sigma2, double gamma_thr) {
  return glrt_statistic(x, geo, sigma2) <= gamma_thr ? 1 : 2;
}

double noncentrality(const Vec& v, const ModelGeometry& geo, double sigma2) {
  check_length(v, geo.N(), "noncentrality");
  return (geo.Pperp * v).squaredNorm() / sigma2;
}

SelectionProbs true_selection_probs(double lambda, double gamma_thr, int r) {
  specfn::ChiSqParams{r, gamma_thr, lambda}.validate();
  const auto t = specfn::NoncentralChiSq(r, gamma_thr).terms(lambda);
  return {t.cdf, t.survival};
}

double assumed_selection_prob(int k, const Vec& theta_k, const ModelGeometry& geo,
                              double sigma2, double gamma_thr) {
  if (k == 1) {
    check_length(theta_k, geo.M(), "assumed_selection_prob");
    return specfn::chi2_cdf_central(geo.r, gamma_thr);
  }
  if (k == 2) {
    const double lambda = noncentrality(theta_k, geo, sigma2);
    return specfn::chi2_survival_noncentral({geo.r, gamma_thr, lambda});
  }
  throw DomainError("assumed_selection_prob: k must be 1 or 2");
}

double min_assumed_selection_prob(int k, int r, double gamma_thr) {
  if (k == 1) return specfn::chi2_cdf_central(r, gamma_thr);
  if (k != 2) throw DomainError("min_assumed_selection_prob: k must be 1 or 2");
  // Q_r(g; lambda) over lambda >= 0: scan a geometric grid anchored at 0.
  const specfn::NoncentralChiSq chi(r, gamma_thr);
  double best = chi.survival(0.0);
  for (double lambda = 1e-6; lambda <= 1e3; lambda *= 2.0) best = std::min(best, chi.survival(lambda));
  return best;
}

Vec sample_observation(Stream& rng, const Vec& phi, double sigma2) {
  const double sd = std::sqrt(sigma2);
  Vec x(phi.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i) x[i] = phi[i] + sd * rng.gaussian();
  return x;
}

Mat generate_channel(std::uint64_t seed, Eigen::Index N, Eigen::Index M) {
  if (M < 1 || M >= N) throw DomainError("generate_channel: need 1 <= M < N");
  Stream rng(seed);
  Mat H(N, M);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < M; ++j) H(i, j) = rng.gaussian();
  build_geometry(H);
  return H;
}

Vec generate_gaussian_vector(std::uint64_t seed, Eigen::Index n) {
  Stream rng(seed);
  return rng.gaussian_vector(n);
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (count < 1) throw DomainError("log_grid: count must be >= 1");
  if (!(lo > 0.0) || !(hi >= lo)) throw DomainError("log_grid: need 0 < lo <= hi");
  if (count == 1) return {lo};
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (count - 1));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

}  // namespace psmcrb
