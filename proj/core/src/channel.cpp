#include "epd/channel.hpp"

#include <cmath>
#include <set>

#include "epd/rng.hpp"

namespace epd {

std::vector<double> Scenario::path_angles() const {
  std::vector<double> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(p.theta_deg);
  return out;
}

void Scenario::validate() const {
  if (paths.empty()) throw std::invalid_argument("Scenario: at least one path");
  if (num_snapshots < 1) throw std::invalid_argument("Scenario: num_snapshots >= 1");
  if (noise_power <= 0.0 || tx_power <= 0.0)
    throw std::invalid_argument("Scenario: powers must be > 0");
  std::set<double> angles;
  for (const auto& p : paths) {
    if (!(p.theta_deg > -90.0 && p.theta_deg < 90.0))
      throw std::domain_error("Scenario: path angle outside (-90, 90)");
    if (!angles.insert(p.theta_deg).second)
      throw std::invalid_argument("Scenario: path angles must be distinct");
  }
}

CMat draw_gains(const Scenario& scenario, std::uint64_t seed) {
  scenario.validate();
  const int l = scenario.num_paths();
  const int n = scenario.num_snapshots;
  SplitMix64 rng(seed);
  CMat gains(l, n);
  const double var = scenario.gain_std * scenario.gain_std;
  for (int i = 0; i < l; ++i) {
    const double snr_lin = std::pow(10.0, scenario.paths[i].snr_db / 10.0);
    const double g =
        std::sqrt(snr_lin * scenario.noise_power / scenario.tx_power);
    for (int j = 0; j < n; ++j)
      gains(i, j) = g * rng.complex_gaussian(var);
  }
  return gains;
}

SnapshotBatch simulate(const Scenario& scenario, const ArrayConfig& arr,
                       const Precoder& f, const CMat& gains,
                       std::uint64_t noise_seed) {
  scenario.validate();
  if (f.tx_elements() != arr.num_elements)
    throw std::invalid_argument("simulate: precoder row count != num_elements");
  if (gains.rows() != scenario.num_paths() || gains.cols() != scenario.num_snapshots)
    throw std::invalid_argument("simulate: gain matrix shape mismatch");

  const CMat v = steering_matrix(arr, scenario.path_angles());
  const CMat signal =
      std::sqrt(scenario.tx_power) * (f.mat.transpose() * v) * gains;

  SplitMix64 rng(noise_seed);
  CMat noise(signal.rows(), signal.cols());
  for (Eigen::Index j = 0; j < noise.cols(); ++j)
    for (Eigen::Index i = 0; i < noise.rows(); ++i)
      noise(i, j) = rng.complex_gaussian(scenario.noise_power);

  SnapshotBatch batch;
  batch.observations = signal + noise;
  batch.true_gains = gains;
  batch.rng_seed = noise_seed;
  return batch;
}

CMat sample_covariance(const SnapshotBatch& batch) {
  const Eigen::Index n = batch.observations.cols();
  if (n < 1) throw std::invalid_argument("sample_covariance: empty batch");
  CMat r = batch.observations * batch.observations.adjoint() / static_cast<double>(n);
  // Symmetrize away round-off.
  return 0.5 * (r + r.adjoint());
}

}  // namespace epd
