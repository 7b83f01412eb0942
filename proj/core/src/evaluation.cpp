#include "epd/evaluation.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "epd/rng.hpp"

namespace epd {

Assignment pair_estimates(const std::vector<double>& truth,
                          const std::vector<double>& est) {
  const int l = static_cast<int>(truth.size());
  if (est.size() != truth.size())
    throw std::invalid_argument("pair_estimates: length mismatch");
  if (l > 20) throw std::invalid_argument("pair_estimates: too many paths");

  // Bitmask DP over subsets of estimates: dp[mask] is the optimal cost of
  // pairing the first popcount(mask) truths with the estimate set `mask`.
  const int full = (1 << l) - 1;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dp(full + 1, inf);
  std::vector<int> choice(full + 1, -1);
  dp[0] = 0.0;
  for (int mask = 0; mask < full; ++mask) {
    if (dp[mask] == inf) continue;
    const int i = __builtin_popcount(static_cast<unsigned>(mask));
    for (int j = 0; j < l; ++j) {
      if (mask & (1 << j)) continue;
      const double d = truth[i] - est[j];
      const int next = mask | (1 << j);
      if (dp[mask] + d * d < dp[next]) {
        dp[next] = dp[mask] + d * d;
        choice[next] = j;
      }
    }
  }

  Assignment out;
  out.est_for_truth.resize(l);
  out.errors_deg.resize(l);
  out.total_sq = dp[full];
  int mask = full;
  for (int i = l - 1; i >= 0; --i) {
    const int j = choice[mask];
    out.est_for_truth[i] = j;
    out.errors_deg[i] = std::abs(truth[i] - est[j]);
    mask &= ~(1 << j);
  }
  return out;
}

double rmse(const std::vector<TrialResult>& trials) {
  if (trials.empty()) throw std::invalid_argument("rmse: no trials");
  double sum = 0.0;
  int count = 0;
  for (const auto& t : trials) {
    if (t.failed) continue;
    double s = 0.0;
    for (double e : t.paired_errors_deg) s += e * e;
    sum += s;
    ++count;
  }
  if (count == 0) throw std::runtime_error("rmse: all trials failed");
  return std::sqrt(sum / count);
}

RVec crb_aod(const Scenario& scenario, const ArrayConfig& arr,
             const Precoder& f, const CMat& gains) {
  scenario.validate();
  const int l = scenario.num_paths();
  const int n = scenario.num_snapshots;
  if (gains.rows() != l || gains.cols() != n)
    throw std::invalid_argument("crb_aod: gain matrix shape mismatch");

  const double sqrt_p = std::sqrt(scenario.tx_power);
  const std::vector<double> angles = scenario.path_angles();
  CMat c(f.beams(), l), d(f.beams(), l);
  for (int i = 0; i < l; ++i) {
    c.col(i) = sqrt_p * (f.mat.transpose() * steering_vector(arr, angles[i]));
    d.col(i) = sqrt_p * (f.mat.transpose() * derivative_beam(arr, angles[i]));
  }
  const CMat chc = c.adjoint() * c;  // Gram blocks reused per snapshot
  const CMat dhc = d.adjoint() * c;
  const CMat dhd = d.adjoint() * d;

  // Real parameter vector [theta; (Re alpha_n, Im alpha_n)_n].
  const int dim = l + 2 * l * n;
  RMat fim = RMat::Zero(dim, dim);
  const double scale = 2.0 / scenario.noise_power;
  const std::complex<double> im(0.0, 1.0);
  for (int s = 0; s < n; ++s) {
    const int base = l + 2 * l * s;
    for (int i = 0; i < l; ++i) {
      for (int k = 0; k < l; ++k) {
        const std::complex<double> ai = gains(i, s), ak = gains(k, s);
        fim(i, k) += scale * (std::conj(ai) * ak * dhd(i, k)).real();
        const std::complex<double> cross = std::conj(ai) * dhc(i, k);
        fim(i, base + k) += scale * cross.real();
        fim(base + k, i) += scale * cross.real();
        fim(i, base + l + k) += scale * (cross * im).real();
        fim(base + l + k, i) += scale * (cross * im).real();
        fim(base + i, base + k) += scale * chc(i, k).real();
        fim(base + l + i, base + l + k) += scale * chc(i, k).real();
        const double skew = scale * (chc(i, k) * im).real();
        fim(base + i, base + l + k) += skew;
        fim(base + l + k, base + i) += skew;
      }
    }
  }

  Eigen::FullPivLU<RMat> lu(fim);
  RVec out(l);
  if (!lu.isInvertible()) {
    out.setConstant(std::numeric_limits<double>::infinity());
    return out;
  }
  const RMat inv = lu.inverse();
  const double r2d2 = (180.0 / kPi) * (180.0 / kPi);
  for (int i = 0; i < l; ++i) out(i) = inv(i, i) * r2d2;
  return out;
}

namespace {

struct TaskOutcome {
  std::vector<PrecoderStats> per_precoder;
};

TaskOutcome run_task(const BenchmarkTask& task, std::size_t task_index,
                     const ArrayConfig& arr, const BenchmarkOptions& opts) {
  task.scenario.validate();
  if (task.precoders.empty())
    throw std::invalid_argument("run_benchmark: no precoders for task");

  // Equal transmit power across strategies; refuse otherwise.
  const double ref = task.precoders.front().precoder.frobenius();
  for (const auto& entry : task.precoders) {
    if (std::abs(entry.precoder.frobenius() - ref) > 1e-10 * ref)
      throw std::invalid_argument(
          "run_benchmark: precoders must have equal Frobenius norm");
  }

  const int l = task.scenario.num_paths();
  const std::vector<double> truth = task.scenario.path_angles();
  const std::size_t num_precoders = task.precoders.size();

  // Deflation removes two beamspace dimensions, so a strategy whose bank has
  // fewer than L + 2 beams (or no projector at all) cannot run the estimator.
  // It still competes: every trial counts as a failure and the CRB is kept.
  std::vector<bool> estimable(num_precoders);
  for (std::size_t p = 0; p < num_precoders; ++p) {
    const auto& entry = task.precoders[p];
    estimable[p] =
        entry.sip.has_projector() && entry.precoder.beams() - 2 >= l;
  }

  std::vector<std::vector<TrialResult>> results(num_precoders);
  std::vector<RVec> crb_sum(num_precoders, RVec::Zero(l));

  for (int trial = 0; trial < opts.trials; ++trial) {
    const std::uint64_t trial_key =
        static_cast<std::uint64_t>(task_index) * 1000003ULL +
        static_cast<std::uint64_t>(trial);
    const CMat gains = draw_gains(
        task.scenario, derive_seed(opts.seed, trial_key, seed_purpose::kGains));

    for (std::size_t p = 0; p < num_precoders; ++p) {
      const auto& entry = task.precoders[p];
      TrialResult tr;
      tr.trial_index = trial;
      if (!estimable[p]) {
        tr.failed = true;
        tr.failure_reason = "bank has fewer beams than the estimator needs";
        results[p].push_back(std::move(tr));
        crb_sum[p] += crb_aod(task.scenario, arr, entry.precoder, gains);
        continue;
      }
      try {
        const SnapshotBatch batch =
            simulate(task.scenario, arr, entry.precoder, gains,
                     derive_seed(opts.seed, trial_key,
                                 seed_purpose::kNoise + 16 * p));
        EstimatorConfig est_cfg;
        est_cfg.num_paths = l;
        est_cfg.sip = entry.sip;
        const AoDEstimate est =
            estimate_aod(sample_covariance(batch), est_cfg, arr);
        tr.estimate = est;
        tr.paired_errors_deg = pair_estimates(truth, est.angles_deg).errors_deg;
      } catch (const EstimationFailure& e) {
        tr.failed = true;
        tr.failure_reason = e.what();
      }
      results[p].push_back(std::move(tr));
      crb_sum[p] += crb_aod(task.scenario, arr, entry.precoder, gains);
    }
  }

  TaskOutcome outcome;
  for (std::size_t p = 0; p < num_precoders; ++p) {
    PrecoderStats stats;
    stats.trial_count = opts.trials;

    std::vector<double> trial_sq;  // per non-failed trial sum of squares
    int failures = 0;
    for (const auto& tr : results[p]) {
      if (tr.failed) {
        ++failures;
        continue;
      }
      double s = 0.0;
      for (double e : tr.paired_errors_deg) s += e * e;
      trial_sq.push_back(s);
    }
    stats.failure_rate = static_cast<double>(failures) / opts.trials;

    if (trial_sq.empty()) {
      // No usable trial: infinite error keeps comparisons well defined.
      const double inf = std::numeric_limits<double>::infinity();
      stats.rmse_deg = stats.ci_lo_deg = stats.ci_hi_deg = inf;
    } else {
      double mean = 0.0;
      for (double s : trial_sq) mean += s;
      stats.rmse_deg = std::sqrt(mean / trial_sq.size());

      // Percentile bootstrap on the RMSE.
      SplitMix64 rng(derive_seed(opts.seed, task_index * 31 + p,
                                 seed_purpose::kBootstrap));
      std::vector<double> samples(opts.bootstrap_resamples);
      for (int b = 0; b < opts.bootstrap_resamples; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < trial_sq.size(); ++i)
          acc += trial_sq[static_cast<std::size_t>(rng.uniform() *
                                                   trial_sq.size())];
        samples[b] = std::sqrt(acc / trial_sq.size());
      }
      std::sort(samples.begin(), samples.end());
      const auto pick = [&](double q) {
        const double idx = q * (samples.size() - 1);
        return samples[static_cast<std::size_t>(std::lround(idx))];
      };
      stats.ci_lo_deg = pick(0.025);
      stats.ci_hi_deg = pick(0.975);
    }

    const RVec crb_mean = crb_sum[p] / opts.trials;
    for (int i = 0; i < l; ++i)
      stats.crb_root_deg.push_back(std::sqrt(crb_mean(i)));
    outcome.per_precoder.push_back(std::move(stats));
  }
  return outcome;
}

}  // namespace

BenchmarkReport run_benchmark(const std::vector<BenchmarkTask>& tasks,
                              const ArrayConfig& arr,
                              const BenchmarkOptions& opts) {
  if (opts.trials < 1) throw std::invalid_argument("run_benchmark: trials >= 1");

  std::vector<TaskOutcome> outcomes(tasks.size());
  std::exception_ptr error;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size() || abort.load()) return;
      try {
        outcomes[i] = run_task(tasks[i], i, arr, opts);
      } catch (...) {
        if (!abort.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };

  const int threads = std::max(1, opts.threads);
  if (threads == 1 || tasks.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min<std::size_t>(threads, tasks.size()); ++t)
      pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  // Deterministic row order regardless of worker scheduling.
  BenchmarkReport report;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    for (std::size_t p = 0; p < tasks[i].precoders.size(); ++p) {
      BenchmarkRow row;
      row.axis_value = tasks[i].axis_value;
      row.precoder = tasks[i].precoders[p].name;
      row.stats = outcomes[i].per_precoder[p];
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace epd
