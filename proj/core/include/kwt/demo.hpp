#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kwt/types.hpp"

namespace kwt {

// Hermetic end-to-end pipeline over a synthetic dataset and the served mock
// model: estimate knowledge scores, build the weighted training file plus
// the ft_top and r_tuning baselines, evaluate with a score-dependent
// abstaining mock, and write a full metric report. Every output in out_dir
// is byte-identical across runs for a fixed seed.
struct DemoOptions {
  std::uint64_t seed = 7;
  std::string out_dir;
  int n_instances = 24;
  int s = 5;
  int concurrency = 4;
};

// Self-contained fictional QA instances ("vault codeword" lookups) whose
// per-instance mock correctness cycles through {0, 0.2, 0.4, 0.6, 0.8, 1.0}.
std::vector<QaInstance> make_demo_dataset(int n_instances);

// Runs the pipeline, logging progress to log. Returns the number of files
// written.
int run_demo(const DemoOptions& options, std::ostream& log);

}  // namespace kwt
