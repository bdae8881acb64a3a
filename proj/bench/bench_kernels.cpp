// Serial references against their OpenMP kernels.
#include <benchmark/benchmark.h>

#include <utility>
#include <vector>

#include "quasidyn/dynamics.hpp"
#include "quasidyn/spectra.hpp"
#include "quasidyn/transfer.hpp"

using namespace qd;

namespace {

std::vector<double> energy_grid(long n) {
  std::vector<double> e(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) e[static_cast<std::size_t>(i)] = -3.0 + 30.0 * static_cast<double>(i) / static_cast<double>(n);
  return e;
}

void BM_TraceSweepSerial(benchmark::State& state) {
  auto e = energy_grid(state.range(0));
  auto g = RotationNumber::golden();
  for (auto _ : state) benchmark::DoNotOptimize(trace_sweep_serial(e, 10, 2, 24.0, g));
}

void BM_TraceSweepParallel(benchmark::State& state) {
  auto e = energy_grid(state.range(0));
  auto g = RotationNumber::golden();
  for (auto _ : state) benchmark::DoNotOptimize(trace_sweep(e, 10, 2, 24.0, g));
}

const Propagator& propagator(long N) {
  static std::vector<std::pair<long, Propagator>> cache;
  for (const auto& [n, p] : cache)
    if (n == N) return p;
  cache.emplace_back(N, Propagator(build_hamiltonian(24.0, RotationNumber::golden(), Phase::zero(), N)));
  return cache.back().second;
}

void BM_WindowNormSerial(benchmark::State& state) {
  const auto& p = propagator(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(averaged_window_norm_serial(p, 10.0, 100.0));
}

void BM_WindowNormParallel(benchmark::State& state) {
  const auto& p = propagator(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(p.averaged_window_norm(10.0, 100.0));
}

std::vector<std::pair<int, int>> cells() {
  std::vector<std::pair<int, int>> c;
  for (int k = 1; k <= 7; ++k)
    for (int p = 0; p <= 3; ++p) c.emplace_back(k, p);
  return c;
}

void BM_BandGridSerial(benchmark::State& state) {
  auto c = cells();
  for (auto _ : state) benchmark::DoNotOptimize(band_set_grid_serial(c, 24.0, RotationNumber::golden()));
}

void BM_BandGridParallel(benchmark::State& state) {
  auto c = cells();
  for (auto _ : state) benchmark::DoNotOptimize(band_set_grid(c, 24.0, RotationNumber::golden()));
}

}  // namespace

BENCHMARK(BM_TraceSweepSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_TraceSweepParallel)->Arg(1000)->Arg(10000);
BENCHMARK(BM_WindowNormSerial)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WindowNormParallel)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BandGridSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BandGridParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
