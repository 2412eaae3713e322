#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "psmcrb/bounds.hpp"
#include "psmcrb/estimators.hpp"

namespace psmcrb {

enum class EstimatorTag { MSL, MSNL, PSML, OracleML };

inline constexpr std::array<EstimatorTag, 4> kEstimators{
    EstimatorTag::MSL, EstimatorTag::MSNL, EstimatorTag::PSML, EstimatorTag::OracleML};

const char* to_string(EstimatorTag e);

/// MSL -> Naive, MSNL -> Normalized, PSML -> SelectiveInference.
/// OracleML has no post-selection interpretation.
std::optional<Interpretation> matching_interpretation(EstimatorTag e);

struct TrialRecord {
  std::int64_t trial_index = 0;
  int selected_k = 0;
  double statistic = 0.0;
  bool failed = false;  // an estimator solve threw; excluded from MSE statistics
  std::array<Vec, 4> theta;    // OracleML stores its phi-space estimate here too
  std::array<Vec, 4> phi_hat;  // indexed like kEstimators
};

/// Stream for trial `trial_index` at grid position `gamma_index`.
Stream trial_stream(std::uint64_t master_seed, std::size_t gamma_index, std::int64_t trial_index);

TrialRecord run_trial(Stream& rng, const ExperimentConfig& config, const ModelGeometry& geo,
                      const ShrinkageSolver& solver, std::int64_t trial_index = 0);
TrialRecord run_trial(Stream& rng, const ExperimentConfig& config, const ModelGeometry& geo,
                      double gamma_thr);

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Per-estimator statistics at one threshold. NaN marks a statistic whose
/// branch had no samples (or whose pseudo-true vector is undefined).
struct EstimatorStats {
  double mse_trace = kNaN;  // E|phi_hat - phi|^2
  double mse_trace_se = kNaN;
  double bias_l1 = kNaN;  // sum_n |E[phi_hat_n - phi_n]|
  double bias_l1_se = kNaN;  // sum of componentwise standard errors
  // Conditional k-th MSE about the matching pseudo-true vector, theta-space
  // (OracleML: phi-space about phi).
  std::array<double, 2> cond_mse_trace{kNaN, kNaN};
  std::array<double, 2> cond_mse_trace_se{kNaN, kNaN};
  // Conditional MSE about phi in phi-space; p1 * [0] + p2 * [1] = mse_trace.
  std::array<double, 2> cond_mse_phi_trace{kNaN, kNaN};
};

struct SweepRow {
  double gamma_thr = 0.0;
  std::int64_t trials = 0;
  std::int64_t failures = 0;
  std::int64_t count_k1 = 0;
  double empirical_p1 = kNaN;
  double p1 = kNaN;  // F_r(g; lambda)
  std::array<EstimatorStats, 4> est;
  std::array<double, 3> ps_mcrb_trace{kNaN, kNaN, kNaN};
  std::array<double, 3> ps_bias_l1{kNaN, kNaN, kNaN};
  std::array<std::array<double, 2>, 3> mcrb_k_trace{};  // NaN when the branch vanished
  double oracle_crb_trace = kNaN;
  double oracle_crb_true_model_trace = kNaN;
  double conventional_mcrb1_trace = kNaN;
  double conventional_mcrb2_trace = kNaN;
  double anti_oracle_mcrb_trace = kNaN;
  double anti_oracle_bias_l1 = kNaN;

  const EstimatorStats& of(EstimatorTag e) const { return est[static_cast<int>(e)]; }
};

/// Deterministic fold over records in the order given.
SweepRow aggregate(const std::vector<TrialRecord>& records, const ExperimentConfig& config,
                   const ModelGeometry& geo, const BoundReport& bounds);
SweepRow aggregate(const std::vector<TrialRecord>& records, const ExperimentConfig& config,
                   double gamma_thr);

struct PsmsBias {
  Vec bias;  // E[theta_hat | k] - vartheta
  Vec se;
  std::int64_t count = 0;
};

/// Throws DegenerateSelection when no record selected k.
PsmsBias empirical_psms_bias(const std::vector<TrialRecord>& records, EstimatorTag est, int k,
                             const Vec& pseudotrue);

struct SweepOptions {
  unsigned workers = 0;  // 0: hardware concurrency
  std::function<void(std::size_t done, std::size_t total)> progress;
  /// Optional per-threshold hook that sees the raw records before they are dropped.
  std::function<void(std::size_t gamma_index, const std::vector<TrialRecord>&)> on_records;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<BoundReport> bounds;
};

/// Runs config.trials trials at every threshold. Results depend only on the
/// config, never on the worker count.
SweepResult sweep(const ExperimentConfig& config, const SweepOptions& options = {});

/// Just the records for one threshold (index into config.gamma_grid).
std::vector<TrialRecord> run_trials(const ExperimentConfig& config, const ModelGeometry& geo,
                                    std::size_t gamma_index, unsigned workers = 0);

}  // namespace psmcrb
