#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

namespace epd {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Thrown when the estimator cannot produce an angle (unreachable phase,
/// collapsed subspace). Trials catching this count as failures, not crashes.
struct EstimationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularSystem : std::runtime_error {
  explicit SingularSystem(const std::string& what, double cond)
      : std::runtime_error(what), condition_number(cond) {}
  double condition_number;
};

/// ULA geometry. spacing_ratio is d/lambda; carrier_hz is informational.
struct ArrayConfig {
  int num_elements = 64;
  double spacing_ratio = 0.5;
  double carrier_hz = 28e9;

  void validate() const;
};

/// Strictly increasing angles, all inside (-90, 90) degrees.
struct AngleGrid {
  std::vector<double> angles_deg;

  int count() const { return static_cast<int>(angles_deg.size()); }
  void validate() const;
};

/// Complex N_tx x M precoding matrix. Columns are per-transmission beams.
struct Precoder {
  CMat mat;

  int tx_elements() const { return static_cast<int>(mat.rows()); }
  int beams() const { return static_cast<int>(mat.cols()); }
  double frobenius() const { return mat.norm(); }
};

/// Rescale so that trace(F F^H) = M (number of columns).
Precoder normalize_power(const Precoder& f);

/// [a(theta)]_k = exp(j 2 pi (d/lambda) k sin(theta)), k = 0..N-1.
CVec steering_vector(const ArrayConfig& cfg, double theta_deg);

/// d a(theta) / d theta, theta in radians: entry k is
/// j 2 pi (d/lambda) k cos(theta) [a(theta)]_k.
CVec derivative_beam(const ArrayConfig& cfg, double theta_deg);

/// Columns a(theta_i) for each angle, N_tx x K.
CMat steering_matrix(const ArrayConfig& cfg, const std::vector<double>& angles_deg);
CMat steering_matrix(const ArrayConfig& cfg, const AngleGrid& grid);

/// J1 = [I 0], J2 = [0 I], both (N-1) x N.
std::pair<RMat, RMat> selection_matrices(const ArrayConfig& cfg);

/// A(grid)^T F, size N_grid x M.
CMat beampattern(const ArrayConfig& cfg, const Precoder& f, const AngleGrid& grid);

/// Inverse of the element phase step: arcsin(phase / (2 pi d/lambda)), degrees.
/// Throws EstimationFailure for phases outside the reachable range.
double phase_to_angle(const ArrayConfig& cfg, double phase_rad);

/// Uniform grid of 16*N_tx points over [-89.5, 89.5] degrees.
AngleGrid default_grid(const ArrayConfig& cfg);

}  // namespace epd
