#include <benchmark/benchmark.h>

#include "kwt/demo.hpp"
#include "kwt/estimator.hpp"
#include "kwt/mockmodel.hpp"

namespace {

void BM_EstimateInProcess(benchmark::State& state) {
  auto dataset = kwt::make_demo_dataset(static_cast<int>(state.range(0)));
  kwt::MockSpec spec;
  spec.p = 0.6;
  spec.seed = 3;
  kwt::MockCompletionClient client(spec, dataset);

  kwt::EstimationConfig config;
  config.s = 5;
  config.seed = 3;
  config.concurrency = 4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kwt::estimate(dataset, config, client));
  }
}
BENCHMARK(BM_EstimateInProcess)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
