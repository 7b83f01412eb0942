#pragma once

#include "epd/array.hpp"
#include "epd/sip.hpp"

namespace epd {

struct EstimatorConfig {
  int num_paths = 1;
  SipSolution sip;
  double pinv_tol = 1e-10;

  void validate(Eigen::Index m) const;
};

struct AoDEstimate {
  std::vector<double> angles_deg;                  // sorted ascending
  std::vector<std::complex<double>> eigenvalues;   // matching order; ideal |.| = 1
  double subspace_min_singular = 0.0;              // smallest sigma of Q U_s
};

/// L dominant eigenvectors of the Hermitian PSD covariance, orthonormal.
CMat signal_subspace(const CMat& r, int num_paths);

/// Beamspace ESPRIT: deflate, LS-solve for the rotation operator, read the
/// AoDs off its eigenvalue phases.
AoDEstimate estimate_aod(const CMat& r, const EstimatorConfig& cfg,
                         const ArrayConfig& arr);

}  // namespace epd
