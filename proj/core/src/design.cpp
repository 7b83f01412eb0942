#include "epd/design.hpp"

#include <cmath>

#include "epd/rng.hpp"

namespace epd {

namespace {

// J1 F - J2 F Lambda without materializing the selection matrices.
CMat shift_residual(const CMat& f, const CMat& lambda) {
  const Eigen::Index n = f.rows();
  return f.topRows(n - 1) - f.bottomRows(n - 1) * lambda;
}

// J1^T S: append a zero bottom row.
CMat pad_bottom(const CMat& s) {
  CMat out = CMat::Zero(s.rows() + 1, s.cols());
  out.topRows(s.rows()) = s;
  return out;
}

// J2^T S: prepend a zero top row.
CMat pad_top(const CMat& s) {
  CMat out = CMat::Zero(s.rows() + 1, s.cols());
  out.bottomRows(s.rows()) = s;
  return out;
}

}  // namespace

QuadraticForm::QuadraticForm(CMat a, CMat b, CMat lambda, double eta)
    : a_(std::move(a)), b_(std::move(b)), lambda_(std::move(lambda)), eta_(eta) {
  if (eta_ < 0.0) throw std::invalid_argument("QuadraticForm: eta must be >= 0");
  if (a_.cols() != b_.rows())
    throw std::invalid_argument("QuadraticForm: A / B grid size mismatch");
  if (lambda_.rows() != b_.cols() || lambda_.cols() != b_.cols())
    throw std::invalid_argument("QuadraticForm: Lambda must be M x M");
  a_conj_ = a_.conjugate();
  p_ = a_conj_ * b_;
  c0_ = b_.squaredNorm();
}

CMat QuadraticForm::apply(const CMat& f) const {
  if (f.rows() != a_.rows() || f.cols() != b_.cols())
    throw std::invalid_argument("QuadraticForm::apply: F shape mismatch");
  CMat out = a_conj_ * (a_.transpose() * f);
  if (eta_ > 0.0) {
    const CMat s = shift_residual(f, lambda_);
    out += eta_ * (pad_bottom(s) - pad_top(s * lambda_.adjoint()));
  }
  return out;
}

CMat QuadraticForm::gradient(const CMat& f) const { return apply(f) - p_; }

double QuadraticForm::value(const CMat& f) const {
  double v = (b_ - a_.transpose() * f).squaredNorm();
  if (eta_ > 0.0) v += eta_ * shift_residual(f, lambda_).squaredNorm();
  return v;
}

double QuadraticForm::lipschitz() const {
  if (lipschitz_ >= 0.0) return lipschitz_;
  SplitMix64 rng(0x5eed'0f0f'1234'9876ULL);
  CMat v(a_.rows(), b_.cols());
  for (Eigen::Index j = 0; j < v.cols(); ++j)
    for (Eigen::Index i = 0; i < v.rows(); ++i)
      v(i, j) = rng.complex_gaussian(1.0);
  v /= v.norm();
  double lam = 0.0;
  for (int it = 0; it < 50; ++it) {
    CMat w = apply(v);
    lam = w.norm();
    if (lam <= 0.0) break;
    v = w / lam;
  }
  lipschitz_ = std::max(lam, 1e-300);
  return lipschitz_;
}

CMat QuadraticForm::dense_h() const {
  const Eigen::Index n = a_.rows(), m = b_.cols();
  CMat h(n * m, n * m);
  CMat e = CMat::Zero(n, m);
  for (Eigen::Index c = 0; c < n * m; ++c) {
    e(c % n, c / n) = 1.0;
    const CMat col = apply(e);
    h.col(c) = Eigen::Map<const CVec>(col.data(), n * m);
    e(c % n, c / n) = 0.0;
  }
  return h;
}

CMat unit_modulus_project(const CMat& f) {
  CMat out(f.rows(), f.cols());
  for (Eigen::Index j = 0; j < f.cols(); ++j)
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      const std::complex<double> z = f(i, j);
      const double mag = std::abs(z);
      out(i, j) = mag > 0.0 ? z / mag : std::complex<double>(1.0, 0.0);
    }
  return out;
}

CMat solve_f_subproblem(const QuadraticForm& q, const CMat& f_init,
                        const InnerSolverConfig& cfg) {
  if (cfg.max_iters < 1)
    throw std::invalid_argument("solve_f_subproblem: max_iters must be >= 1");
  if (!f_init.allFinite())
    throw std::invalid_argument("solve_f_subproblem: non-finite initial point");

  const double mu0 = 1.0 / q.lipschitz();
  CMat f = f_init;
  CMat best = f_init;
  double best_val = q.value(f_init);
  if (!std::isfinite(best_val))
    throw std::runtime_error("solve_f_subproblem: non-finite objective");

  int stalls = 0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const CMat g = q.gradient(f);
    double mu = mu0;
    CMat next = unit_modulus_project(f - mu * g);
    if (cfg.step_rule == StepRule::kBacktracking) {
      double val = q.value(next);
      const double cur = q.value(f);
      while (val > cur && mu > 1e-12 * mu0) {
        mu *= 0.5;
        next = unit_modulus_project(f - mu * g);
        val = q.value(next);
      }
    }
    const double pg_norm = (next - f).norm() / mu;
    const double val = q.value(next);
    if (val < best_val) {
      best_val = val;
      best = next;
      stalls = 0;
    } else if (++stalls >= 5) {
      break;
    }
    f = next;
    if (pg_norm < cfg.grad_tol) break;
  }
  return best;
}

CMat solve_f_unconstrained(const QuadraticForm& q, const CMat& f_init) {
  // Conjugate gradients on H f = p (H Hermitian PSD).
  CMat f = f_init;
  CMat r = q.p_mat() - q.apply(f);
  CMat d = r;
  double rho = r.squaredNorm();
  const double tol = 1e-12 * std::max(1.0, q.p_mat().norm());
  const int max_iters = static_cast<int>(2 * f.size()) + 100;
  for (int it = 0; it < max_iters && std::sqrt(rho) > tol; ++it) {
    const CMat hd = q.apply(d);
    const double dhd = (d.conjugate().cwiseProduct(hd)).sum().real();
    if (dhd <= 0.0) break;
    const double alpha = rho / dhd;
    f += alpha * d;
    r -= alpha * hd;
    const double rho_next = r.squaredNorm();
    d = r + (rho_next / rho) * d;
    rho = rho_next;
  }
  return f;
}

DesignResult design(const ArrayConfig& arr, const Precoder& base,
                    const DesignConfig& cfg, const AngleGrid& grid) {
  arr.validate();
  grid.validate();
  if (cfg.conv_tol <= 0.0) throw std::invalid_argument("design: conv_tol must be > 0");
  if (base.tx_elements() != arr.num_elements)
    throw std::invalid_argument("design: baseline row count != num_elements");

  const CMat a = steering_matrix(arr, grid);
  // Under the unit-modulus constraint every feasible F has squared norm
  // N * M; match the target's power so constant-modulus baselines are exact
  // fixed points instead of being off by a global scale.
  CMat target = base.mat;
  if (cfg.unit_modulus)
    target *= std::sqrt(static_cast<double>(target.size())) / target.norm();
  const CMat b = a.transpose() * target;

  CMat f = cfg.unit_modulus ? unit_modulus_project(target) : target;
  CMat lambda = lambda_ls_minimum_norm(Precoder{f});

  DesignTrace trace;
  auto record = [&](int iter) {
    DesignTraceEntry e;
    e.iteration = iter;
    e.synthesis_error = (b - a.transpose() * f).squaredNorm();
    e.sip_err = sip_error(Precoder{f}, lambda);
    e.objective = e.synthesis_error + cfg.eta * e.sip_err;
    trace.entries.push_back(e);
    return e.objective;
  };

  double prev = record(0);
  for (int it = 1; it <= cfg.max_outer_iters; ++it) {
    const QuadraticForm q(a, b, lambda, cfg.eta);
    f = cfg.unit_modulus ? solve_f_subproblem(q, f, cfg.inner)
                         : solve_f_unconstrained(q, f);
    lambda = lambda_ls_minimum_norm(Precoder{f});
    const double cur = record(it);
    if (prev - cur < cfg.conv_tol * std::max(std::abs(prev), 1e-300)) break;
    prev = cur;
  }

  DesignResult out;
  out.unnormalized = Precoder{f};
  out.precoder = normalize_power(Precoder{f});
  out.sip = solve_sip(out.precoder);
  out.trace = std::move(trace);
  return out;
}

RVec phase_increment_profile(const Precoder& f, int column) {
  if (column < 0 || column >= f.beams())
    throw std::out_of_range("phase_increment_profile: column index");
  const Eigen::Index n = f.mat.rows();
  RVec profile(n - 1);
  auto phase = [](const std::complex<double>& z) {
    return std::abs(z) > 0.0 ? std::arg(z) : 0.0;
  };
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double d = phase(f.mat(k + 1, column)) - phase(f.mat(k, column));
    profile(k) = std::remainder(d, 2.0 * kPi);
  }
  return profile;
}

}  // namespace epd
