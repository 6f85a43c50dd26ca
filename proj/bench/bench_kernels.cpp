#include "otfs/channel.hpp"
#include "otfs/comm.hpp"
#include "otfs/dd_kernels.hpp"
#include "otfs/experiments.hpp"

#include <benchmark/benchmark.h>

using namespace otfs;

namespace {

DDGrid random_grid(int m, int n, std::uint64_t seed) {
  Rng rng(seed);
  DDGrid g(m, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < m; ++r) g(r, c) = rng.cnormal(1.0);
  return g;
}

void surface(benchmark::State& state, Exec exec) {
  const int stride = static_cast<int>(state.range(0));
  const DDGrid x = random_grid(80, 80, 1);
  const DDGrid y = random_grid(80 / stride, 80, 2);
  for (auto _ : state) benchmark::DoNotOptimize(correlation_surface(y, x, stride, 80, exec));
}

void effective_channel(benchmark::State& state, Exec exec) {
  const auto cfg = SystemConfig::reference();
  const std::vector<Tap> taps{{0, 0}, {3, 1}, {7, -2}, {12, 4}};
  const std::vector<cplx> h{{1.0, 0.0}, {0.3, 0.1}, {-0.2, 0.2}, {0.1, -0.1}};
  const SpreadCode code = default_code(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(build_effective_channel(taps, h, code, cfg, exec));
}

void shift(benchmark::State& state) {
  const DDGrid x = random_grid(80, 80, 3);
  for (auto _ : state) benchmark::DoNotOptimize(twisted_shift(x, 17, -5));
}

}  // namespace

BENCHMARK_CAPTURE(surface, serial, Exec::serial)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(surface, parallel, Exec::parallel)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(effective_channel, serial, Exec::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(effective_channel, parallel, Exec::parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(shift)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
