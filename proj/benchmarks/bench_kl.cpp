#include <benchmark/benchmark.h>

#include <cmath>
#include <string>
#include <vector>

#include "kwt/klanalysis.hpp"
#include "kwt/rng.hpp"

namespace {

std::vector<kwt::TokenDistFrame> make_frames(int positions, int vocab) {
  kwt::SplitMix64 rng(kwt::RngKey(11).part("bench").value());
  std::vector<kwt::TokenDistFrame> frames;
  for (int pos = 1; pos <= positions; ++pos) {
    kwt::TokenDistFrame frame;
    frame.instance_id = "bench";
    frame.position = pos;
    double base_total = 0.0;
    double trained_total = 0.0;
    for (int v = 0; v < vocab; ++v) {
      std::string token = "tok" + std::to_string(v);
      double b = rng.next_double() + 1e-6;
      double t = rng.next_double() + 1e-6;
      frame.base.probs[token] = b;
      frame.trained.probs[token] = t;
      base_total += b;
      trained_total += t;
    }
    for (auto& [token, p] : frame.base.probs) p *= 0.9 / base_total;
    for (auto& [token, p] : frame.trained.probs) p *= 0.9 / trained_total;
    frame.base.rest_mass = 0.1;
    frame.trained.rest_mass = 0.1;
    frames.push_back(std::move(frame));
  }
  return frames;
}

void BM_KlPerPair(benchmark::State& state) {
  auto frames = make_frames(16, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kwt::kl_per_pair(frames));
  }
}
BENCHMARK(BM_KlPerPair)->Arg(5)->Arg(20)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
