#include "epd/codebook.hpp"

#include <cmath>

namespace epd {

void UncertaintyInterval::validate() const {
  if (!(theta_min_deg < theta_max_deg))
    throw std::invalid_argument("UncertaintyInterval: theta_min must be < theta_max");
  if (!(theta_min_deg > -90.0 && theta_max_deg < 90.0))
    throw std::domain_error("UncertaintyInterval: interval must lie inside (-90, 90)");
}

void CodebookSpec::validate() const {
  if (intervals.empty()) throw std::invalid_argument("CodebookSpec: at least one interval");
  if (gamma < 0.0) throw std::invalid_argument("CodebookSpec: gamma must be >= 0");
  if (min_grid_points < 1) throw std::invalid_argument("CodebookSpec: min_grid_points >= 1");
  for (const auto& u : intervals) u.validate();
}

double beamwidth_3db_rad(const ArrayConfig& cfg, double theta_deg) {
  const double c = std::cos(deg2rad(theta_deg));
  if (c <= 0.0) throw std::domain_error("beamwidth_3db_rad: angle at end-fire");
  return 0.886 / (cfg.num_elements * cfg.spacing_ratio * c);
}

AngleGrid beam_grid(const ArrayConfig& cfg, const UncertaintyInterval& interval,
                    int min_points) {
  interval.validate();
  const double bw_deg = rad2deg(beamwidth_3db_rad(cfg, interval.center()));
  int n = static_cast<int>(std::ceil(interval.width() / bw_deg));
  n = std::max({1, min_points, n});

  AngleGrid grid;
  if (n == 1) {
    grid.angles_deg = {interval.center()};
  } else {
    grid.angles_deg.resize(n);
    for (int i = 0; i < n; ++i)
      grid.angles_deg[i] =
          interval.theta_min_deg + interval.width() * i / (n - 1);
  }
  grid.validate();
  return grid;
}

Precoder build_baseline(const ArrayConfig& cfg, const CodebookSpec& spec) {
  cfg.validate();
  spec.validate();

  std::vector<double> angles;
  for (const auto& u : spec.intervals) {
    const AngleGrid g = beam_grid(cfg, u, spec.min_grid_points);
    angles.insert(angles.end(), g.angles_deg.begin(), g.angles_deg.end());
  }
  const Eigen::Index cols = static_cast<Eigen::Index>(angles.size());

  CMat f_sum(cfg.num_elements, cols);
  CMat f_diff(cfg.num_elements, cols);
  for (Eigen::Index i = 0; i < cols; ++i) {
    f_sum.col(i) = steering_vector(cfg, angles[i]).conjugate();
    f_diff.col(i) = derivative_beam(cfg, angles[i]).conjugate();
  }

  Precoder out;
  switch (spec.style) {
    case CodebookStyle::kSum:
      out.mat = f_sum;
      break;
    case CodebookStyle::kDiff:
      out.mat = f_diff;
      break;
    case CodebookStyle::kSumDiff: {
      // Equal Frobenius norms before gamma weighting.
      f_diff *= f_sum.norm() / f_diff.norm();
      out.mat.resize(cfg.num_elements, 2 * cols);
      out.mat << f_sum, spec.gamma * f_diff;
      break;
    }
  }
  return normalize_power(out);
}

}  // namespace epd
