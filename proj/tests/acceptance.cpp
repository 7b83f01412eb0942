// End-to-end acceptance checks for the precoder design and estimation
// pipeline. Each criterion prints one PASS/FAIL line; the exit code is the
// number of failures.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "epd/channel.hpp"
#include "epd/esprit.hpp"
#include "epd/experiments.hpp"
#include "epd/rng.hpp"

using namespace epd;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool ok,
            const std::string& detail = "") {
  std::printf("[%2d] %s  %s%s%s\n", index, ok ? "PASS" : "FAIL", name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void run(int index, const std::string& name,
         const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [ok, detail] = body();
    report(index, name, ok, detail);
  } catch (const std::exception& e) {
    report(index, name, false, std::string("exception: ") + e.what());
  }
}

Precoder sum_precoder(const ArrayConfig& arr, const std::vector<double>& angles) {
  Precoder f;
  f.mat = steering_matrix(arr, angles).conjugate();
  return normalize_power(f);
}

std::vector<double> random_angles(SplitMix64& rng, int count, double lo,
                                  double hi, double min_gap) {
  std::vector<double> angles;
  while (static_cast<int>(angles.size()) < count) {
    const double cand = lo + (hi - lo) * rng.uniform();
    bool ok = true;
    for (double a : angles) ok = ok && std::abs(a - cand) > min_gap;
    if (ok) angles.push_back(cand);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

CMat exact_covariance(const ArrayConfig& arr, const Precoder& f,
                      const std::vector<double>& path_angles,
                      const std::vector<double>& path_powers) {
  const CMat c = f.mat.transpose() * steering_matrix(arr, path_angles);
  CMat rho = CMat::Zero(c.cols(), c.cols());
  for (Eigen::Index i = 0; i < c.cols(); ++i) rho(i, i) = path_powers[i];
  return c * rho * c.adjoint();
}

bool trace_monotone(const DesignTrace& trace, double tol) {
  for (std::size_t i = 1; i < trace.entries.size(); ++i) {
    const double prev = trace.entries[i - 1].objective;
    if (trace.entries[i].objective > prev + tol * std::max(1.0, prev))
      return false;
  }
  return true;
}

// Aggregate transmit power pattern over the grid, unit-normalized.
RVec power_pattern(const ArrayConfig& arr, const Precoder& f,
                   const AngleGrid& grid) {
  const CMat pattern = beampattern(arr, f, grid);
  RVec p = pattern.cwiseAbs2().rowwise().sum();
  return p / p.norm();
}

double profile_variance(const Precoder& f) {
  double total = 0.0;
  for (int m = 0; m < f.beams(); ++m) {
    const RVec prof = phase_increment_profile(f, m);
    const double mean = prof.mean();
    total += (prof.array() - mean).square().mean();
  }
  return total / f.beams();
}

RMat fd_fim(const ArrayConfig& arr, const Scenario& sc, const Precoder& f,
            const CMat& gains) {
  const int l = sc.num_paths();
  const int n = sc.num_snapshots;
  const int dim = l + 2 * l * n;
  const double h = 1e-6;

  auto mean_stack = [&](const std::vector<double>& theta_rad, const CMat& g) {
    std::vector<double> theta_deg(l);
    for (int i = 0; i < l; ++i) theta_deg[i] = rad2deg(theta_rad[i]);
    const CMat sig = std::sqrt(sc.tx_power) *
                     (f.mat.transpose() * steering_matrix(arr, theta_deg)) * g;
    return CVec(Eigen::Map<const CVec>(sig.data(), sig.size()));
  };

  std::vector<double> theta0(l);
  for (int i = 0; i < l; ++i) theta0[i] = deg2rad(sc.paths[i].theta_deg);

  auto perturbed = [&](int param, double delta) {
    std::vector<double> theta = theta0;
    CMat g = gains;
    if (param < l) {
      theta[param] += delta;
    } else {
      const int rest = param - l;
      const int snap = rest / (2 * l);
      const int inner = rest % (2 * l);
      const int path = inner % l;
      if (inner < l)
        g(path, snap) += delta;
      else
        g(path, snap) += std::complex<double>(0.0, delta);
    }
    return mean_stack(theta, g);
  };

  CMat jac(static_cast<Eigen::Index>(f.beams()) * n, dim);
  for (int p = 0; p < dim; ++p)
    jac.col(p) = (perturbed(p, h) - perturbed(p, -h)) / (2.0 * h);
  return (2.0 / sc.noise_power) * (jac.adjoint() * jac).real();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct EtaSweepResult {
  std::vector<double> etas;
  std::vector<DesignResult> designs;
};

// Shared heavy computation: difference-beam baseline at -10 degrees on the
// 64-element array, redesigned at several penalty weights.
EtaSweepResult run_eta_sweep(const ArrayConfig& arr) {
  Scenario sc;
  sc.paths = {{-10.0, 20.0, {0, -13.0, -7.0}}};
  CodebookSettings cb;
  const Precoder base =
      build_baseline(arr, codebook_spec(sc, cb, CodebookStyle::kDiff));
  const AngleGrid grid = default_grid(arr);

  EtaSweepResult out;
  out.etas = {1.0, 1e2, 1e4, 1e6};
  for (double eta : out.etas) {
    DesignConfig cfg;
    cfg.eta = eta;
    out.designs.push_back(design(arr, base, cfg, grid));
  }
  return out;
}

}  // namespace

int main() {
  const ArrayConfig arr64{64, 0.5, 28e9};
  const ArrayConfig arr32{32, 0.5, 28e9};
  const ArrayConfig arr16{16, 0.5, 28e9};

  // ---- 1: exact shift invariance for sum and DFT codebooks ----------------
  run(1, "sum and DFT codebooks satisfy shift invariance exactly", [&] {
    double worst = 0.0;
    for (int n : {8, 64}) {
      const ArrayConfig arr{n, 0.5, 28e9};
      SplitMix64 rng(1000 + n);
      for (int rep = 0; rep < 20; ++rep) {
        const Precoder f =
            sum_precoder(arr, random_angles(rng, 6, -75.0, 75.0, 1.0));
        worst = std::max(worst, solve_sip(f).residual);
      }
      // DFT columns: F(k, m) = exp(j 2 pi k c_m / n) for random distinct
      // column sets (duplicates would make the shifted bank rank deficient).
      for (int rep = 0; rep < 20; ++rep) {
        std::vector<int> cols;
        while (cols.size() < 6) {
          const int c = static_cast<int>(rng.uniform() * n);
          if (std::find(cols.begin(), cols.end(), c) == cols.end())
            cols.push_back(c);
        }
        Precoder f;
        f.mat.resize(n, 6);
        for (int m = 0; m < 6; ++m)
          for (int k = 0; k < n; ++k)
            f.mat(k, m) = std::polar(1.0, 2.0 * kPi * k * cols[m] / n);
        worst = std::max(worst, solve_sip(f).residual);
      }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "worst residual %.3g", worst);
    return std::make_pair(worst < 1e-10, std::string(buf));
  });

  // ---- 2: deflation restores the rotation identity ------------------------
  run(2, "deflated subspace identity Q C Phi = Q Lambda^T C", [&] {
    SplitMix64 rng(2024);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const int m = 4 + static_cast<int>(rng.uniform() * 4);  // 4..7 beams
      const int l = 1 + static_cast<int>(rng.uniform() * (m - 2));
      const Precoder f =
          sum_precoder(arr16, random_angles(rng, m, -75.0, 75.0, 1.0));
      const std::vector<double> paths = random_angles(rng, l, -70.0, 70.0, 2.0);
      const SipSolution sip = solve_sip(f);

      const CMat c = f.mat.transpose() * steering_matrix(arr16, paths);
      CMat phi = CMat::Zero(l, l);
      for (int i = 0; i < l; ++i)
        phi(i, i) = steering_vector(arr16, paths[i])(1);
      const double err =
          (sip.projector * c * phi - sip.projector * sip.lambda_mat.transpose() * c)
              .norm();
      worst = std::max(worst, err);
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "worst error %.3g", worst);
    return std::make_pair(worst < 1e-9, std::string(buf));
  });

  // ---- 3: noiseless estimator recovery ------------------------------------
  run(3, "noiseless covariance yields exact angle recovery", [&] {
    const Precoder f1 = sum_precoder(arr64, {17.0, 19.0, 21.0, 23.0});
    EstimatorConfig c1;
    c1.num_paths = 1;
    c1.sip = solve_sip(f1);
    const AoDEstimate e1 =
        estimate_aod(exact_covariance(arr64, f1, {20.0}, {1.0}), c1, arr64);
    const double err1 = std::abs(e1.angles_deg[0] - 20.0);

    const Precoder f2 =
        sum_precoder(arr64, {17.0, 19.0, 21.0, 23.0, 67.0, 69.0, 71.0, 73.0});
    EstimatorConfig c2;
    c2.num_paths = 2;
    c2.sip = solve_sip(f2);
    const AoDEstimate e2 = estimate_aod(
        exact_covariance(arr64, f2, {20.0, 70.0}, {1.0, 0.5}), c2, arr64);
    const double err2 = std::max(std::abs(e2.angles_deg[0] - 20.0),
                                 std::abs(e2.angles_deg[1] - 70.0));
    char buf[80];
    std::snprintf(buf, sizeof buf, "errors %.3g deg (L=1), %.3g deg (L=2)",
                  err1, err2);
    return std::make_pair(err1 < 1e-6 && err2 < 1e-6, std::string(buf));
  });

  // Heavy shared computation for criteria 4-7.
  const EtaSweepResult sweep = run_eta_sweep(arr64);

  // ---- 4: alternating optimization descends -------------------------------
  run(4, "alternating optimization objective never increases", [&] {
    int checked = 0;
    bool ok = true;
    // The difference-beam redesigns from the shared sweep...
    for (const auto& d : sweep.designs) {
      ok = ok && trace_monotone(d.trace, 1e-12);
      ++checked;
    }
    // ...plus random baselines on a small array.
    SplitMix64 rng(4040);
    const AngleGrid grid = default_grid(arr16);
    for (int rep = 0; rep < 9; ++rep) {
      Precoder base;
      base.mat.resize(16, 4);
      for (Eigen::Index j = 0; j < 4; ++j)
        for (Eigen::Index i = 0; i < 16; ++i)
          base.mat(i, j) = rng.complex_gaussian(1.0);
      DesignConfig cfg;
      cfg.eta = (rep % 3 == 0) ? 0.0 : ((rep % 3 == 1) ? 10.0 : 1e4);
      cfg.max_outer_iters = 20;
      cfg.inner.max_iters = 100;
      const DesignResult res = design(arr16, base, cfg, grid);
      ok = ok && trace_monotone(res.trace, 1e-12);
      ++checked;
    }
    return std::make_pair(ok, std::to_string(checked) + " traces checked");
  });

  // ---- 5: penalty pulls difference beams toward sum beams -----------------
  run(5, "high penalty moves the pattern from difference toward sum shape", [&] {
    Scenario sc;
    sc.paths = {{-10.0, 20.0, {0, -13.0, -7.0}}};
    CodebookSettings cb;
    const Precoder sum_ref =
        normalize_power(build_baseline(arr64, codebook_spec(sc, cb, CodebookStyle::kSum)));
    const Precoder diff_ref =
        normalize_power(build_baseline(arr64, codebook_spec(sc, cb, CodebookStyle::kDiff)));
    const AngleGrid grid = default_grid(arr64);
    const RVec sum_pat = power_pattern(arr64, sum_ref, grid);
    const RVec diff_pat = power_pattern(arr64, diff_ref, grid);

    const RVec lo = power_pattern(arr64, sweep.designs.front().precoder, grid);
    const RVec hi = power_pattern(arr64, sweep.designs.back().precoder, grid);

    const double sum_lo = lo.dot(sum_pat), sum_hi = hi.dot(sum_pat);
    const double diff_lo = lo.dot(diff_pat), diff_hi = hi.dot(diff_pat);
    char buf[120];
    std::snprintf(buf, sizeof buf,
                  "sum corr %.4f -> %.4f, diff corr %.4f -> %.4f", sum_lo,
                  sum_hi, diff_lo, diff_hi);
    return std::make_pair(sum_hi > sum_lo && diff_hi < diff_lo,
                          std::string(buf));
  });

  // ---- 6: penalty flattens per-element phase increments -------------------
  run(6, "high penalty shrinks phase-increment variance below 25%", [&] {
    const double var_lo = profile_variance(sweep.designs.front().precoder);
    const double var_hi = profile_variance(sweep.designs.back().precoder);
    char buf[96];
    std::snprintf(buf, sizeof buf, "variance %.4g -> %.4g (ratio %.3f)",
                  var_lo, var_hi, var_hi / var_lo);
    return std::make_pair(var_hi < 0.25 * var_lo, std::string(buf));
  });

  // ---- 7: shift-invariance error decreases with the penalty ---------------
  run(7, "shift-invariance error is monotone in the penalty weight", [&] {
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < sweep.designs.size(); ++i) {
      const double err = sweep.designs[i].sip.residual;
      if (i > 0 && err > 1.05 * sweep.designs[i - 1].sip.residual) ok = false;
      char buf[48];
      std::snprintf(buf, sizeof buf, "%s%.3g", i ? ", " : "", err);
      detail += buf;
    }
    return std::make_pair(ok, "residuals " + detail);
  });

  // ---- 8: lower-bound sanity ----------------------------------------------
  run(8, "information matrix validated; estimator near the bound at 30 dB", [&] {
    // Analytic vs finite-difference information matrix on a small instance.
    Scenario small;
    small.paths = {{20.0, 10.0, {0, 17.0, 23.0}}};
    small.num_snapshots = 3;
    const Precoder fs = sum_precoder(arr32, {17.0, 20.0, 23.0});
    const CMat gains = draw_gains(small, 88);
    const RMat fim = fd_fim(arr32, small, fs, gains);
    const RVec crb = crb_aod(small, arr32, fs, gains);
    const double fd_crb = fim.inverse()(0, 0) * std::pow(180.0 / kPi, 2);
    const double rel = std::abs(crb(0) - fd_crb) / fd_crb;
    if (rel >= 1e-4)
      return std::make_pair(false,
                            "finite-difference mismatch " + std::to_string(rel));

    // Monte Carlo estimator accuracy vs the bound.
    Scenario sc;
    sc.paths = {{20.0, 30.0, {0, 17.0, 23.0}}};
    sc.num_snapshots = 50;
    CodebookSettings cb;
    CodebookSpec spec = codebook_spec(sc, cb, CodebookStyle::kSum);
    while (beam_grid(arr32, spec.intervals[0], spec.min_grid_points).count() < 3)
      ++spec.min_grid_points;
    const Precoder f = normalize_power(build_baseline(arr32, spec));

    BenchmarkTask task;
    task.axis_value = 30.0;
    task.scenario = sc;
    task.precoders = {{"sum", f, solve_sip(f)}};
    BenchmarkOptions opts;
    opts.trials = 100;
    opts.seed = 11;
    const BenchmarkReport rep = run_benchmark({task}, arr32, opts);
    const auto& stats = rep.rows[0].stats;
    char buf[120];
    std::snprintf(buf, sizeof buf,
                  "FD rel err %.2g; RMSE %.4f deg vs bound %.4f deg", rel,
                  stats.rmse_deg, stats.crb_root_deg[0]);
    return std::make_pair(stats.rmse_deg <= 3.0 * stats.crb_root_deg[0],
                          std::string(buf));
  });

  // ---- 9 & 10: designed precoder vs baselines over the angle sweep --------
  BenchmarkReport sweep_report;
  run(9, "designed precoder beats the undesigned sum-diff set across angles", [&] {
    const std::vector<double> thetas = {0.0, 20.0, 40.0, 60.0, 70.0};
    CodebookSettings cb;
    DesignConfig dcfg;

    std::vector<BenchmarkTask> tasks;
    for (double theta : thetas) {
      Scenario sc;
      sc.paths = {{theta, 20.0, {0, theta - 3.0, theta + 3.0}}};
      sc.num_snapshots = 50;
      BenchmarkTask task;
      task.axis_value = theta;
      task.scenario = sc;
      task.precoders = build_strategies(arr64, sc, cb, dcfg);
      tasks.push_back(std::move(task));
    }

    BenchmarkOptions opts;
    opts.trials = 200;
    opts.seed = 21;
    sweep_report = run_benchmark(tasks, arr64, opts);

    std::printf("     angle  precoder         rmse_deg  [95%% interval]  fail\n");
    for (const auto& row : sweep_report.rows)
      std::printf("     %5.1f  %-15s  %8.4f  [%.4f, %.4f]  %.2f\n",
                  row.axis_value, row.precoder.c_str(), row.stats.rmse_deg,
                  row.stats.ci_lo_deg, row.stats.ci_hi_deg,
                  row.stats.failure_rate);

    int wins = 0;
    for (double theta : thetas) {
      double esprit = 0.0, plain = 0.0;
      for (const auto& row : sweep_report.rows) {
        if (row.axis_value != theta) continue;
        if (row.precoder == "sum-diff-esprit") esprit = row.stats.rmse_deg;
        if (row.precoder == "sum-diff") plain = row.stats.rmse_deg;
      }
      if (esprit <= plain) ++wins;
    }
    return std::make_pair(wins >= 4,
                          "wins at " + std::to_string(wins) + " of 5 angles");
  });

  run(10, "designed precoder beats the sum codebook toward end-fire", [&] {
    double esprit = -1.0, sum = -1.0;
    for (const auto& row : sweep_report.rows) {
      if (row.axis_value != 70.0) continue;
      if (row.precoder == "sum-diff-esprit") esprit = row.stats.rmse_deg;
      if (row.precoder == "sum") sum = row.stats.rmse_deg;
    }
    if (esprit < 0.0 || sum < 0.0)
      return std::make_pair(false, std::string("missing rows from the sweep"));
    char buf[96];
    std::snprintf(buf, sizeof buf, "rmse %.4f deg (designed) vs %.4f deg (sum)",
                  esprit, sum);
    return std::make_pair(esprit < sum, std::string(buf));
  });

  // ---- 11: determinism of the command pipeline ----------------------------
  run(11, "repeated runs with one seed produce byte-identical outputs", [&] {
    ExperimentConfig cfg;
    cfg.array = arr16;
    cfg.scenario.paths = {{20.0, 25.0, {0, 17.0, 23.0}}};
    cfg.scenario.num_snapshots = 10;
    cfg.design.max_outer_iters = 3;
    cfg.design.inner.max_iters = 40;
    cfg.trials = 4;
    cfg.seed = 5;

    const fs::path dir = fs::temp_directory_path() / "epd_acceptance_det";
    fs::remove_all(dir);
    cfg.out_dir = (dir / "design").string();
    cmd_design(cfg);
    std::vector<std::string> first;
    for (const char* name : {"precoder.csv", "beampattern.csv",
                             "phase_increments.csv", "trace.csv"})
      first.push_back(slurp(dir / "design" / name));
    cmd_design(cfg);
    bool ok = true;
    int i = 0;
    for (const char* name : {"precoder.csv", "beampattern.csv",
                             "phase_increments.csv", "trace.csv"})
      ok = ok && slurp(dir / "design" / name) == first[i++];

    cfg.experiment = ExperimentKind::kSnrSweep;
    cfg.sweep = {20.0, 30.0};
    cfg.out_dir = (dir / "eval").string();
    cmd_evaluate(cfg);
    const std::string report1 = slurp(dir / "eval" / "report.csv");
    const std::string summary1 = slurp(dir / "eval" / "summary.json");
    cmd_evaluate(cfg);
    ok = ok && slurp(dir / "eval" / "report.csv") == report1;
    ok = ok && slurp(dir / "eval" / "summary.json") == summary1;
    fs::remove_all(dir);
    return std::make_pair(ok, std::string("design and evaluate outputs compared"));
  });

  std::printf("%d of 11 criteria passed\n", 11 - failures);
  return failures;
}
