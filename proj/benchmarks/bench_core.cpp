#include <benchmark/benchmark.h>

#include <vector>

#include "htsentinel/calibration.hpp"
#include "htsentinel/powerlaw.hpp"
#include "htsentinel/rng.hpp"
#include "htsentinel/spectra.hpp"
#include "htsentinel/synth.hpp"

using namespace htsentinel;

static void BM_esd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto w = synth::gen_gaussian_matrix(n, n, 1.0, 42);
  for (auto _ : state) {
    auto s = spectra::esd(w);
    benchmark::DoNotOptimize(s.eigenvalues.data());
  }
}
BENCHMARK(BM_esd)->Arg(128)->Arg(256)->Arg(400);

static void BM_select_xmin(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RngStream rng(7);
  auto values = calibration::sample_powerlaw(2.5, 1.0, n, rng);
  std::sort(values.begin(), values.end());
  const spectra::Spectrum s{values, n, n};
  for (auto _ : state) {
    auto fit = powerlaw::select_xmin(s, 10);
    benchmark::DoNotOptimize(fit.ks_d);
  }
}
BENCHMARK(BM_select_xmin)->Arg(400)->Arg(1000)->Arg(2000);

static void BM_ks_distance(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RngStream rng(11);
  auto tail = powerlaw::TailSample::from_values(
      calibration::sample_powerlaw(2.5, 1.0, n, rng), 1.0);
  const double alpha = powerlaw::fit_alpha(tail);
  for (auto _ : state) {
    benchmark::DoNotOptimize(powerlaw::ks_distance(tail, alpha));
  }
}
BENCHMARK(BM_ks_distance)->Arg(300)->Arg(3000);

static void BM_calibration_cell(benchmark::State& state) {
  calibration::CalibrationConfig cfg;
  cfg.alphas = {2.5};
  cfg.n_tails = {300};
  cfg.runs = static_cast<std::size_t>(state.range(0));
  cfg.seed = 5;
  for (auto _ : state) {
    auto res = calibration::run_calibration(cfg, 1);
    benchmark::DoNotOptimize(res.recommended_c);
  }
}
BENCHMARK(BM_calibration_cell)->Arg(100)->Arg(1000);

static void BM_trajectory_matrix(benchmark::State& state) {
  synth::TrajectorySpec spec;
  spec.rows = spec.cols = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto w = synth::gen_trajectory_matrix(spec, 80);
    benchmark::DoNotOptimize(w.values.data());
  }
}
BENCHMARK(BM_trajectory_matrix)->Arg(300);

BENCHMARK_MAIN();
