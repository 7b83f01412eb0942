#include "epd/sip.hpp"

#include <Eigen/SVD>
#include <limits>

namespace epd {

namespace {

// Shifted halves without materializing J1/J2.
CMat top_shift(const CMat& f) { return f.topRows(f.rows() - 1); }
CMat bottom_shift(const CMat& f) { return f.bottomRows(f.rows() - 1); }

double condition_number(const CMat& a) {
  Eigen::JacobiSVD<CMat> svd(a);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

CMat lambda_ls(const Precoder& f) {
  const Eigen::Index m = f.mat.cols();
  if (f.mat.rows() - 1 < m)
    throw std::invalid_argument("lambda_ls: requires N_tx - 1 >= M");
  const CMat j2f = bottom_shift(f.mat);
  Eigen::BDCSVD<CMat> svd(j2f, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) <= 1e-12 * s(0))
    throw SingularSystem("lambda_ls: J2 F is rank deficient",
                         s(s.size() - 1) > 0.0
                             ? s(0) / s(s.size() - 1)
                             : std::numeric_limits<double>::infinity());
  return svd.solve(top_shift(f.mat));
}

CMat lambda_ls_minimum_norm(const Precoder& f, double rel_threshold) {
  const Eigen::Index m = f.mat.cols();
  if (f.mat.rows() - 1 < m)
    throw std::invalid_argument("lambda_ls_minimum_norm: requires N_tx - 1 >= M");
  if (rel_threshold <= 0.0 || rel_threshold >= 1.0)
    throw std::invalid_argument(
        "lambda_ls_minimum_norm: rel_threshold must be in (0, 1)");
  Eigen::BDCSVD<CMat> svd(bottom_shift(f.mat),
                          Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(rel_threshold);
  return svd.solve(top_shift(f.mat));
}

double sip_error(const Precoder& f, const CMat& lambda) {
  return (top_shift(f.mat) - bottom_shift(f.mat) * lambda).squaredNorm();
}

SipSolution deflation_projector(const Precoder& f, const CMat& lambda) {
  const Eigen::Index m = f.mat.cols();
  if (m < 3)
    throw std::invalid_argument("deflation_projector: requires M >= 3");

  // G = [F^T e_M, Lambda^T F^T e_1]: last and (Lambda-shifted) first rows.
  CMat g(m, 2);
  g.col(0) = f.mat.row(f.mat.rows() - 1).transpose();
  g.col(1) = lambda.transpose() * f.mat.row(0).transpose();

  // Modified Gram-Schmidt, rank tolerance relative to the column norm.
  CMat basis(m, 2);
  Eigen::Index rank = 0;
  for (Eigen::Index c = 0; c < 2; ++c) {
    CVec v = g.col(c);
    const double ref = v.norm();
    for (Eigen::Index i = 0; i < rank; ++i)
      v -= basis.col(i).dot(v) * basis.col(i);
    if (ref > 0.0 && v.norm() > 1e-12 * ref)
      basis.col(rank++) = v / v.norm();
  }
  basis.conservativeResize(m, rank);

  SipSolution out;
  out.lambda_mat = lambda;
  out.residual = sip_error(f, lambda);
  out.basis = basis;
  out.projector = CMat::Identity(m, m) - basis * basis.adjoint();
  return out;
}

namespace {

SipSolution finish_sip(const Precoder& f, const CMat& lambda) {
  SipSolution out;
  if (f.mat.cols() >= 3) {
    out = deflation_projector(f, lambda);
  } else {
    out.lambda_mat = lambda;
    out.residual = sip_error(f, lambda);
  }
  out.lambda_cond = condition_number(lambda);
  return out;
}

}  // namespace

SipSolution solve_sip(const Precoder& f) { return finish_sip(f, lambda_ls(f)); }

SipSolution solve_sip_regularized(const Precoder& f, double rel_threshold) {
  return finish_sip(f, lambda_ls_minimum_norm(f, rel_threshold));
}

}  // namespace epd
