#include <benchmark/benchmark.h>

#include "epd/channel.hpp"
#include "epd/design.hpp"
#include "epd/esprit.hpp"

namespace {

using namespace epd;

const ArrayConfig kArr{64, 0.5, 28e9};

Precoder sum_precoder(const std::vector<double>& angles) {
  Precoder f;
  f.mat = steering_matrix(kArr, angles).conjugate();
  return normalize_power(f);
}

void bm_steering_matrix(benchmark::State& state) {
  const AngleGrid grid = default_grid(kArr);
  for (auto _ : state) {
    const CMat a = steering_matrix(kArr, grid);
    benchmark::DoNotOptimize(a.data());
  }
}
BENCHMARK(bm_steering_matrix);

void bm_lambda_ls(benchmark::State& state) {
  const Precoder f = sum_precoder({17.0, 19.0, 21.0, 23.0, 67.0, 70.0, 73.0});
  for (auto _ : state) {
    const CMat lambda = lambda_ls(f);
    benchmark::DoNotOptimize(lambda.data());
  }
}
BENCHMARK(bm_lambda_ls);

void bm_gradient_step(benchmark::State& state) {
  const AngleGrid grid = default_grid(kArr);
  const CMat a = steering_matrix(kArr, grid);
  const Precoder base = sum_precoder({17.0, 19.0, 21.0, 23.0});
  const CMat b = a.transpose() * base.mat;
  const QuadraticForm q(a, b, lambda_ls(base), 1e5);
  const double mu = 1.0 / q.lipschitz();
  CMat f = unit_modulus_project(base.mat);
  for (auto _ : state) {
    f = unit_modulus_project(f - mu * q.gradient(f));
    benchmark::DoNotOptimize(f.data());
  }
}
BENCHMARK(bm_gradient_step);

void bm_estimate_aod(benchmark::State& state) {
  const Precoder f =
      sum_precoder({17.0, 19.0, 21.0, 23.0, 67.0, 69.0, 71.0, 73.0});
  EstimatorConfig cfg;
  cfg.num_paths = 2;
  cfg.sip = solve_sip(f);

  Scenario sc;
  sc.paths = {{20.0, 20.0, {0, 17.0, 23.0}}, {70.0, 20.0, {1, 67.0, 73.0}}};
  sc.num_snapshots = 50;
  const CMat r = sample_covariance(simulate(sc, kArr, f, draw_gains(sc, 1), 2));
  for (auto _ : state) {
    const AoDEstimate est = estimate_aod(r, cfg, kArr);
    benchmark::DoNotOptimize(est.angles_deg.data());
  }
}
BENCHMARK(bm_estimate_aod);

}  // namespace

BENCHMARK_MAIN();
