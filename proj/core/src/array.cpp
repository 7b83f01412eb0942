#include "epd/array.hpp"

#include <cmath>

namespace epd {

void ArrayConfig::validate() const {
  if (num_elements < 2) throw std::invalid_argument("ArrayConfig: num_elements must be >= 2");
  if (spacing_ratio <= 0.0) throw std::invalid_argument("ArrayConfig: spacing_ratio must be > 0");
  if (carrier_hz <= 0.0) throw std::invalid_argument("ArrayConfig: carrier_hz must be > 0");
}

void AngleGrid::validate() const {
  for (std::size_t i = 0; i < angles_deg.size(); ++i) {
    if (!(angles_deg[i] > -90.0 && angles_deg[i] < 90.0))
      throw std::domain_error("AngleGrid: angle outside (-90, 90)");
    if (i > 0 && !(angles_deg[i] > angles_deg[i - 1]))
      throw std::invalid_argument("AngleGrid: angles must be strictly increasing");
  }
}

Precoder normalize_power(const Precoder& f) {
  const double fro2 = f.mat.squaredNorm();
  if (fro2 <= 0.0) throw std::invalid_argument("normalize_power: zero precoder");
  Precoder out;
  out.mat = f.mat * std::sqrt(static_cast<double>(f.beams()) / fro2);
  return out;
}

static void check_angle(double theta_deg) {
  if (!(theta_deg > -90.0 && theta_deg < 90.0))
    throw std::domain_error("angle outside (-90, 90) degrees");
}

CVec steering_vector(const ArrayConfig& cfg, double theta_deg) {
  check_angle(theta_deg);
  const double step = 2.0 * kPi * cfg.spacing_ratio * std::sin(deg2rad(theta_deg));
  CVec a(cfg.num_elements);
  for (int k = 0; k < cfg.num_elements; ++k)
    a(k) = std::polar(1.0, step * k);
  return a;
}

CVec derivative_beam(const ArrayConfig& cfg, double theta_deg) {
  check_angle(theta_deg);
  const double theta = deg2rad(theta_deg);
  const CVec a = steering_vector(cfg, theta_deg);
  const double factor = 2.0 * kPi * cfg.spacing_ratio * std::cos(theta);
  CVec da(cfg.num_elements);
  for (int k = 0; k < cfg.num_elements; ++k)
    da(k) = std::complex<double>(0.0, factor * k) * a(k);
  return da;
}

CMat steering_matrix(const ArrayConfig& cfg, const std::vector<double>& angles_deg) {
  CMat v(cfg.num_elements, static_cast<Eigen::Index>(angles_deg.size()));
  for (std::size_t i = 0; i < angles_deg.size(); ++i)
    v.col(static_cast<Eigen::Index>(i)) = steering_vector(cfg, angles_deg[i]);
  return v;
}

CMat steering_matrix(const ArrayConfig& cfg, const AngleGrid& grid) {
  return steering_matrix(cfg, grid.angles_deg);
}

std::pair<RMat, RMat> selection_matrices(const ArrayConfig& cfg) {
  cfg.validate();
  const int n = cfg.num_elements;
  RMat j1 = RMat::Zero(n - 1, n);
  RMat j2 = RMat::Zero(n - 1, n);
  j1.leftCols(n - 1) = RMat::Identity(n - 1, n - 1);
  j2.rightCols(n - 1) = RMat::Identity(n - 1, n - 1);
  return {j1, j2};
}

CMat beampattern(const ArrayConfig& cfg, const Precoder& f, const AngleGrid& grid) {
  if (f.tx_elements() != cfg.num_elements)
    throw std::invalid_argument("beampattern: precoder row count != num_elements");
  return steering_matrix(cfg, grid).transpose() * f.mat;
}

double phase_to_angle(const ArrayConfig& cfg, double phase_rad) {
  const double reach = 2.0 * kPi * cfg.spacing_ratio;
  // Small slack absorbs round-off on |sin| = 1 boundaries.
  if (std::abs(phase_rad) > reach * (1.0 + 1e-12))
    throw EstimationFailure("phase_to_angle: phase outside reachable range");
  double s = phase_rad / reach;
  s = std::clamp(s, -1.0, 1.0);
  return rad2deg(std::asin(s));
}

AngleGrid default_grid(const ArrayConfig& cfg) {
  const int n = 16 * cfg.num_elements;
  const double lo = -89.5, hi = 89.5;
  AngleGrid grid;
  grid.angles_deg.resize(n);
  for (int i = 0; i < n; ++i)
    grid.angles_deg[i] = lo + (hi - lo) * i / (n - 1);
  return grid;
}

}  // namespace epd
