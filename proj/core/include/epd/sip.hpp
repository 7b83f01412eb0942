#pragma once

#include "epd/array.hpp"

namespace epd {

/// Shift-invariance solution for a precoder: the LS matrix Lambda, its
/// residual, and the deflation projector used by beamspace ESPRIT.
struct SipSolution {
  CMat lambda_mat;       // M x M
  double residual = 0.0; // ||J1 F - J2 F Lambda||_F^2
  CMat projector;        // M x M Hermitian idempotent; empty when M < 3
  CMat basis;            // M x k, k <= 2, orthonormal columns spanning G
  double lambda_cond = 0.0;

  bool has_projector() const { return projector.size() > 0; }
};

/// Least-squares Lambda = argmin ||J1 F - J2 F Lambda||_F^2.
/// Throws SingularSystem when J2 F is rank deficient.
CMat lambda_ls(const Precoder& f);

/// Same least-squares problem, but singular values of J2 F below
/// rel_threshold * sigma_max are truncated and the minimum-norm solution is
/// returned instead of throwing. Used by the alternating design (whose early
/// iterates can be degenerate) and, with a larger threshold, to keep the
/// estimator's Lambda well conditioned when designed beams nearly coincide.
CMat lambda_ls_minimum_norm(const Precoder& f, double rel_threshold = 1e-12);

/// ||J1 F - J2 F Lambda||_F^2.
double sip_error(const Precoder& f, const CMat& lambda);

/// Projector Q = I - sum_i q_i q_i^H annihilating
/// G = [F^T e_M, Lambda^T F^T e_1]. Requires M >= 3.
SipSolution deflation_projector(const Precoder& f, const CMat& lambda);

/// Lambda via LS plus the projector when M >= 3 (otherwise projector left
/// empty and only Lambda/residual are filled).
SipSolution solve_sip(const Precoder& f);

/// Like solve_sip, but Lambda comes from the truncated-SVD minimum-norm
/// solve, so near-rank-deficient shifted banks yield a bounded Lambda
/// instead of an exception or a huge-norm solution.
SipSolution solve_sip_regularized(const Precoder& f, double rel_threshold);

}  // namespace epd
