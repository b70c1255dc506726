#include <benchmark/benchmark.h>

#include "kwt/metrics.hpp"

namespace {

void BM_Naupc(benchmark::State& state) {
  kwt::Counts counts{123, 45, 678, 90};
  int k = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kwt::naupc(counts, 1.0, k));
  }
}
BENCHMARK(BM_Naupc)->Arg(100)->Arg(1000)->Arg(10000);

void BM_CurvePoints(benchmark::State& state) {
  kwt::Counts counts{123, 45, 678, 90};
  for (auto _ : state) {
    benchmark::DoNotOptimize(kwt::curve_points(counts, 1.0, 1000));
  }
}
BENCHMARK(BM_CurvePoints);

}  // namespace

BENCHMARK_MAIN();
