#include "epd/esprit.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <numeric>

namespace epd {

void EstimatorConfig::validate(Eigen::Index m) const {
  if (num_paths < 1) throw std::invalid_argument("EstimatorConfig: num_paths >= 1");
  if (m - 2 < num_paths)
    throw std::invalid_argument("EstimatorConfig: requires M - 2 >= L");
  if (!sip.has_projector())
    throw std::invalid_argument("EstimatorConfig: SipSolution lacks a projector");
  if (sip.projector.rows() != m)
    throw std::invalid_argument("EstimatorConfig: projector size != M");
}

CMat signal_subspace(const CMat& r, int num_paths) {
  if (num_paths > r.rows())
    throw std::invalid_argument("signal_subspace: L > M");
  Eigen::SelfAdjointEigenSolver<CMat> eig(r);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("signal_subspace: eigendecomposition failed");
  // Eigenvalues come back ascending; dominant vectors are the last columns.
  const Eigen::Index m = r.rows();
  CMat us(m, num_paths);
  for (int i = 0; i < num_paths; ++i)
    us.col(i) = eig.eigenvectors().col(m - 1 - i);
  return us;
}

AoDEstimate estimate_aod(const CMat& r, const EstimatorConfig& cfg,
                         const ArrayConfig& arr) {
  const Eigen::Index m = r.rows();
  cfg.validate(m);

  const CMat us = signal_subspace(r, cfg.num_paths);
  const CMat qus = cfg.sip.projector * us;

  Eigen::BDCSVD<CMat> svd(qus, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= cfg.pinv_tol * sv(0))
    throw EstimationFailure("estimate_aod: deflated subspace collapsed");

  const CMat rhs = cfg.sip.projector * cfg.sip.lambda_mat.transpose() * us;
  const CMat pi = svd.solve(rhs);  // L x L rotation operator

  Eigen::ComplexEigenSolver<CMat> eig(pi);
  if (eig.info() != Eigen::Success)
    throw EstimationFailure("estimate_aod: eigendecomposition failed");

  AoDEstimate out;
  out.subspace_min_singular = sv(sv.size() - 1);
  std::vector<std::pair<double, std::complex<double>>> pairs;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const std::complex<double> lam = eig.eigenvalues()(i);
    pairs.emplace_back(phase_to_angle(arr, std::arg(lam)), lam);
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [angle, lam] : pairs) {
    out.angles_deg.push_back(angle);
    out.eigenvalues.push_back(lam);
  }
  return out;
}

}  // namespace epd
