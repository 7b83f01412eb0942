#pragma once

#include <cstdint>

#include "epd/array.hpp"
#include "epd/codebook.hpp"

namespace epd {

struct PathSpec {
  double theta_deg = 0.0;
  double snr_db = 0.0;
  UncertaintyInterval uncertainty;
};

/// Downlink MISO scenario. SNR of path l is P |g_l|^2 / sigma^2 through the
/// fixed gain g_l; per-snapshot gains multiply g_l by a CN(0, gain_std^2)
/// coefficient.
struct Scenario {
  std::vector<PathSpec> paths;
  int num_snapshots = 50;
  double noise_power = 1.0;
  double tx_power = 1.0;
  double gain_std = 10.0;

  int num_paths() const { return static_cast<int>(paths.size()); }
  std::vector<double> path_angles() const;
  void validate() const;
};

struct SnapshotBatch {
  CMat observations;  // M x N
  CMat true_gains;    // L x N
  std::uint64_t rng_seed = 0;
};

/// alpha_{l,n} = g_l w_{l,n}; deterministic given the seed.
CMat draw_gains(const Scenario& scenario, std::uint64_t seed);

/// y_n = sqrt(P) F^T V alpha_n + z_n with z_n ~ CN(0, sigma^2 I_M).
SnapshotBatch simulate(const Scenario& scenario, const ArrayConfig& arr,
                       const Precoder& f, const CMat& gains,
                       std::uint64_t noise_seed);

/// R = (1/N) sum_n y_n y_n^H.
CMat sample_covariance(const SnapshotBatch& batch);

}  // namespace epd
