#pragma once

#include <functional>

#include "epd/array.hpp"
#include "epd/sip.hpp"

namespace epd {

enum class StepRule { kFixedInverseLipschitz, kBacktracking };

struct InnerSolverConfig {
  int max_iters = 500;
  StepRule step_rule = StepRule::kFixedInverseLipschitz;
  double grad_tol = 1e-8;
};

struct DesignConfig {
  double eta = 1e5;
  int max_outer_iters = 100;
  double conv_tol = 1e-6;
  InnerSolverConfig inner;
  bool unit_modulus = true;
};

struct DesignTraceEntry {
  int iteration = 0;
  double synthesis_error = 0.0;
  double sip_err = 0.0;
  double objective = 0.0;
};

struct DesignTrace {
  std::vector<DesignTraceEntry> entries;
};

/// The quadratic form g(f) = f^H H f - 2 Re(p^H f) + c0 equal to
/// ||B - A^T F||_F^2 + eta ||J1 F - J2 F Lambda||_F^2, applied block-wise
/// in matrix shape (the Kronecker-product H is never materialized).
class QuadraticForm {
 public:
  QuadraticForm(CMat a, CMat b, CMat lambda, double eta);

  Eigen::Index tx() const { return a_.rows(); }
  Eigen::Index beams() const { return b_.cols(); }

  /// H vec(F), returned in matrix shape.
  CMat apply(const CMat& f) const;
  /// H vec(F) - p, matrix shape; the Wirtinger gradient of g.
  CMat gradient(const CMat& f) const;
  double value(const CMat& f) const;

  /// p in matrix shape: conj(A) B.
  const CMat& p_mat() const { return p_; }
  double c0() const { return c0_; }

  /// Largest eigenvalue of H via power iteration (cached, deterministic).
  double lipschitz() const;

  /// Dense H for small instances (tests, diagnostics).
  CMat dense_h() const;

 private:
  CMat a_;       // N_tx x N_grid steering matrix
  CMat a_conj_;  // cached conj(A)
  CMat b_;       // N_grid x M desired beampattern
  CMat lambda_;  // M x M
  CMat p_;       // conj(A) B
  double eta_;
  double c0_;
  mutable double lipschitz_ = -1.0;
};

/// Entry-wise z / |z|; zeros map to 1.
CMat unit_modulus_project(const CMat& f);

/// Projected gradient descent on the unit-modulus torus; returns the best
/// iterate found (objective never above that of f_init).
CMat solve_f_subproblem(const QuadraticForm& q, const CMat& f_init,
                        const InnerSolverConfig& cfg);

/// Unconstrained minimizer of the quadratic via conjugate gradients.
CMat solve_f_unconstrained(const QuadraticForm& q, const CMat& f_init);

struct DesignResult {
  Precoder precoder;      // power-rescaled to trace(F F^H) = M
  Precoder unnormalized;  // final iterate before the power rescale
  SipSolution sip;
  DesignTrace trace;
};

/// Alternating optimization of (F, Lambda) from the baseline precoder.
DesignResult design(const ArrayConfig& arr, const Precoder& base,
                    const DesignConfig& cfg, const AngleGrid& grid);

/// Unwrapped consecutive phase differences of one precoder column.
RVec phase_increment_profile(const Precoder& f, int column);

}  // namespace epd
