#pragma once

#include <cstdint>
#include <string>

#include "epd/channel.hpp"
#include "epd/esprit.hpp"

namespace epd {

struct TrialResult {
  int trial_index = 0;
  AoDEstimate estimate;
  std::vector<double> paired_errors_deg;
  bool failed = false;
  std::string failure_reason;
};

struct Assignment {
  std::vector<int> est_for_truth;   // est_for_truth[i] pairs truth[i]
  std::vector<double> errors_deg;   // |truth[i] - est[est_for_truth[i]]|
  double total_sq = 0.0;
};

/// Minimum-total-squared-error assignment between estimates and truth.
Assignment pair_estimates(const std::vector<double>& truth,
                          const std::vector<double>& est);

/// sqrt(mean over non-failed trials of sum_l error_l^2). Throws when every
/// trial failed.
double rmse(const std::vector<TrialResult>& trials);

/// Conditional (deterministic-gains) CRB on the AoDs, degrees^2 per path.
/// Gains enter as known-structure nuisance parameters; a singular FIM
/// yields +inf bounds.
RVec crb_aod(const Scenario& scenario, const ArrayConfig& arr,
             const Precoder& f, const CMat& gains);

struct PrecoderEntry {
  std::string name;
  Precoder precoder;
  SipSolution sip;
};

struct PrecoderStats {
  double rmse_deg = 0.0;
  double ci_lo_deg = 0.0;    // 95% bootstrap interval on the RMSE
  double ci_hi_deg = 0.0;
  double failure_rate = 0.0;
  int trial_count = 0;
  std::vector<double> crb_root_deg;  // per-path, averaged over trial gains
};

struct BenchmarkTask {
  double axis_value = 0.0;
  Scenario scenario;
  std::vector<PrecoderEntry> precoders;
};

struct BenchmarkRow {
  double axis_value = 0.0;
  std::string precoder;
  PrecoderStats stats;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
};

struct BenchmarkOptions {
  int trials = 100;
  std::uint64_t seed = 1;
  int threads = 1;
  int bootstrap_resamples = 500;
};

/// Monte Carlo benchmark over sweep points. Refuses precoder sets with
/// unequal Frobenius norms (unequal transmit power). Deterministic given
/// the seed; tasks may run on a worker pool.
BenchmarkReport run_benchmark(const std::vector<BenchmarkTask>& tasks,
                              const ArrayConfig& arr,
                              const BenchmarkOptions& opts);

}  // namespace epd
