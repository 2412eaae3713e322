#include "psmcrb/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "psmcrb/errors.hpp"

namespace psmcrb {

namespace {

constexpr std::int64_t kChunk = 1024;

struct RunningStat {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::int64_t n = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return n > 0 ? sum / static_cast<double>(n) : kNaN; }
  double se() const {
    if (n < 2) return kNaN;
    const double dn = static_cast<double>(n);
    const double m = sum / dn;
    return std::sqrt(std::max(0.0, (sum_sq - dn * m * m) / (dn - 1.0)) / dn);
  }
};

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? hc : 1;
}

}  // namespace

const char* to_string(EstimatorTag e) {
  switch (e) {
    case EstimatorTag::MSL:
      return "msl";
    case EstimatorTag::MSNL:
      return "msnl";
    case EstimatorTag::PSML:
      return "psml";
    case EstimatorTag::OracleML:
      return "oracle_ml";
  }
  return "?";
}

std::optional<Interpretation> matching_interpretation(EstimatorTag e) {
  switch (e) {
    case EstimatorTag::MSL:
      return Interpretation::Naive;
    case EstimatorTag::MSNL:
      return Interpretation::Normalized;
    case EstimatorTag::PSML:
      return Interpretation::SelectiveInference;
    case EstimatorTag::OracleML:
      return std::nullopt;
  }
  return std::nullopt;
}

Stream trial_stream(std::uint64_t master_seed, std::size_t gamma_index, std::int64_t trial_index) {
  return Stream::keyed(master_seed, static_cast<std::uint64_t>(gamma_index),
                       static_cast<std::uint64_t>(trial_index));
}

TrialRecord run_trial(Stream& rng, const ExperimentConfig& config, const ModelGeometry& geo,
                      const ShrinkageSolver& solver, std::int64_t trial_index) {
  const Vec phi = config.phi();
  const Vec x = sample_observation(rng, phi, config.sigma2);
  TrialRecord rec;
  rec.trial_index = trial_index;
  rec.statistic = glrt_statistic(x, geo, config.sigma2);
  rec.selected_k = rec.statistic <= solver.threshold() ? 1 : 2;
  const int k = rec.selected_k;

  const Estimate e_msl = msl(x, k, geo);
  rec.theta[0] = e_msl.theta;
  rec.phi_hat[0] = e_msl.phi_hat;
  try {
    const Estimate e_msnl = msnl(x, k, geo, config.sigma2, solver);
    const Estimate e_psml = psml(x, k, geo, config.sigma2, solver);
    rec.theta[1] = e_msnl.theta;
    rec.phi_hat[1] = e_msnl.phi_hat;
    rec.theta[2] = e_psml.theta;
    rec.phi_hat[2] = e_psml.phi_hat;
  } catch (const NumericalError&) {
    rec.failed = true;
    rec.theta[1] = rec.theta[2] = e_msl.theta;
    rec.phi_hat[1] = rec.phi_hat[2] = e_msl.phi_hat;
  }
  rec.phi_hat[3] = oracle_ml(x, config.true_hypothesis, geo);
  rec.theta[3] = rec.phi_hat[3];
  return rec;
}

TrialRecord run_trial(Stream& rng, const ExperimentConfig& config, const ModelGeometry& geo,
                      double gamma_thr) {
  return run_trial(rng, config, geo, ShrinkageSolver(geo.r, gamma_thr));
}

SweepRow aggregate(const std::vector<TrialRecord>& records, const ExperimentConfig& config,
                   const ModelGeometry& geo, const BoundReport& bounds) {
  if (records.empty()) throw DomainError("aggregate: no records");
  const Vec phi = config.phi();
  const Eigen::Index N = geo.N();

  SweepRow row;
  row.gamma_thr = bounds.gamma_thr;
  row.trials = static_cast<std::int64_t>(records.size());
  row.p1 = bounds.p1;

  for (const auto& rec : records) {
    if (rec.selected_k == 1) ++row.count_k1;
    if (rec.failed) ++row.failures;
  }
  row.empirical_p1 = static_cast<double>(row.count_k1) / static_cast<double>(row.trials);
  const std::int64_t n_ok = row.trials - row.failures;

  for (std::size_t e = 0; e < kEstimators.size(); ++e) {
    const auto interp = matching_interpretation(kEstimators[e]);
    std::array<const Vec*, 2> target{nullptr, nullptr};
    std::array<Vec, 2> phi_target;
    if (interp) {
      const auto& ib = bounds.of(*interp);
      for (int k = 0; k < 2; ++k)
        if (!ib.branch_vanished[k]) target[k] = &ib.vartheta[k];
    } else {
      target = {&phi, &phi};
    }

    RunningStat mse;
    std::array<RunningStat, 2> cond, cond_phi;
    Vec err_sum = Vec::Zero(N);
    Vec err_sq = Vec::Zero(N);
    for (const auto& rec : records) {
      if (rec.failed) continue;
      const Vec err = rec.phi_hat[e] - phi;
      const double sq = err.squaredNorm();
      mse.add(sq);
      err_sum += err;
      err_sq += err.cwiseAbs2();
      const int k = rec.selected_k - 1;
      cond_phi[k].add(sq);
      if (target[k]) cond[k].add((rec.theta[e] - *target[k]).squaredNorm());
    }

    EstimatorStats& st = row.est[e];
    if (n_ok == 0) continue;
    const double dn = static_cast<double>(n_ok);
    st.mse_trace = mse.mean();
    st.mse_trace_se = mse.se();
    const Vec mean_err = err_sum / dn;
    st.bias_l1 = mean_err.lpNorm<1>();
    if (n_ok > 1) {
      const Vec var = ((err_sq - dn * mean_err.cwiseAbs2()) / (dn - 1.0)).cwiseMax(0.0);
      st.bias_l1_se = (var / dn).cwiseSqrt().sum();
    }
    for (int k = 0; k < 2; ++k) {
      st.cond_mse_trace[k] = cond[k].mean();
      st.cond_mse_trace_se[k] = cond[k].se();
      st.cond_mse_phi_trace[k] = cond_phi[k].mean();
    }
  }

  for (std::size_t i = 0; i < kInterpretations.size(); ++i) {
    const auto& ib = bounds.per[i];
    row.ps_mcrb_trace[i] = ib.trace;
    row.ps_bias_l1[i] = ib.bias_l1;
    for (int k = 0; k < 2; ++k)
      row.mcrb_k_trace[i][k] = ib.branch_vanished[k] ? kNaN : ib.mcrb[k].trace();
  }
  row.oracle_crb_trace = bounds.oracle_crb_trace;
  row.oracle_crb_true_model_trace = bounds.oracle_crb_true_model_trace;
  row.conventional_mcrb1_trace = bounds.conventional_mcrb1_trace;
  row.conventional_mcrb2_trace = bounds.conventional_mcrb2_trace;
  row.anti_oracle_mcrb_trace = bounds.anti_oracle_mcrb_trace;
  row.anti_oracle_bias_l1 = bounds.anti_oracle_bias_l1;
  return row;
}

SweepRow aggregate(const std::vector<TrialRecord>& records, const ExperimentConfig& config,
                   double gamma_thr) {
  const ModelGeometry geo = build_geometry(config.H);
  const BoundReport bounds =
      compute_bounds(config.phi(), config.true_hypothesis, geo, config.sigma2, gamma_thr);
  return aggregate(records, config, geo, bounds);
}

PsmsBias empirical_psms_bias(const std::vector<TrialRecord>& records, EstimatorTag est, int k,
                             const Vec& pseudotrue) {
  const auto e = static_cast<std::size_t>(est);
  Vec sum = Vec::Zero(pseudotrue.size());
  Vec sum_sq = Vec::Zero(pseudotrue.size());
  std::int64_t n = 0;
  for (const auto& rec : records) {
    if (rec.failed || rec.selected_k != k) continue;
    if (rec.theta[e].size() != pseudotrue.size())
      throw DomainError("empirical_psms_bias: pseudo-true vector has the wrong length");
    const Vec d = rec.theta[e] - pseudotrue;
    sum += d;
    sum_sq += d.cwiseAbs2();
    ++n;
  }
  if (n == 0) throw DegenerateSelection("empirical_psms_bias: branch k=" + std::to_string(k) + " is empty");
  const double dn = static_cast<double>(n);
  PsmsBias out;
  out.count = n;
  out.bias = sum / dn;
  if (n > 1) {
    const Vec var = ((sum_sq - dn * out.bias.cwiseAbs2()) / (dn - 1.0)).cwiseMax(0.0);
    out.se = (var / dn).cwiseSqrt();
  } else {
    out.se = Vec::Constant(pseudotrue.size(), kNaN);
  }
  return out;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& config, const ModelGeometry& geo,
                                    std::size_t gamma_index, unsigned workers) {
  const double gamma_thr = config.gamma_grid.at(gamma_index);
  const ShrinkageSolver solver(geo.r, gamma_thr);
  const std::int64_t trials = config.trials;
  std::vector<TrialRecord> records(static_cast<std::size_t>(trials));
  const std::int64_t n_chunks = (trials + kChunk - 1) / kChunk;

  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::int64_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        const std::int64_t end = std::min(trials, (c + 1) * kChunk);
        for (std::int64_t t = c * kChunk; t < end; ++t) {
          Stream rng = trial_stream(config.master_seed, gamma_index, t);
          records[static_cast<std::size_t>(t)] = run_trial(rng, config, geo, solver, t);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n_chunks);
        return;
      }
    }
  };

  const unsigned n_workers =
      static_cast<unsigned>(std::min<std::int64_t>(resolve_workers(workers), n_chunks));
  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return records;
}

SweepResult sweep(const ExperimentConfig& config, const SweepOptions& options) {
  config.validate();
  const ModelGeometry geo = build_geometry(config.H);
  const Vec phi = config.phi();
  SweepResult out;
  const std::size_t total = config.gamma_grid.size();
  for (std::size_t g = 0; g < total; ++g) {
    const double gamma_thr = config.gamma_grid[g];
    BoundReport bounds = compute_bounds(phi, config.true_hypothesis, geo, config.sigma2, gamma_thr);
    const std::vector<TrialRecord> records = run_trials(config, geo, g, options.workers);
    if (options.on_records) options.on_records(g, records);
    out.rows.push_back(aggregate(records, config, geo, bounds));
    out.bounds.push_back(std::move(bounds));
    if (options.progress) options.progress(g + 1, total);
  }
  return out;
}

}  // namespace psmcrb
