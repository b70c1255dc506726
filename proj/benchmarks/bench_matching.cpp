#include <benchmark/benchmark.h>

#include <string>

#include "kwt/matching.hpp"

namespace {

std::string make_sentence(int words, int salt) {
  std::string out;
  for (int i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += "token" + std::to_string((i * 7 + salt) % 23);
  }
  return out;
}

void BM_RougeLF1(benchmark::State& state) {
  std::string candidate = make_sentence(static_cast<int>(state.range(0)), 1);
  std::string gold = make_sentence(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kwt::rouge_l_f1(candidate, gold));
  }
}
BENCHMARK(BM_RougeLF1)->Arg(8)->Arg(32)->Arg(128);

void BM_EmMatch(benchmark::State& state) {
  std::string candidate = make_sentence(static_cast<int>(state.range(0)), 1);
  std::string gold = candidate + ".";
  for (auto _ : state) {
    benchmark::DoNotOptimize(kwt::em_match(candidate, gold));
  }
}
BENCHMARK(BM_EmMatch)->Arg(8)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
