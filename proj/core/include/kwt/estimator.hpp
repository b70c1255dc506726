#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kwt/completion.hpp"
#include "kwt/matching.hpp"
#include "kwt/rational.hpp"
#include "kwt/types.hpp"

namespace kwt {

// Settings for multi-sampled knowledge estimation.
struct EstimationConfig {
  int s = 5;
  int n_shots = 3;
  double temperature = 0.7;
  std::uint64_t seed = 0;
  MatcherConfig matcher;
  int concurrency = 4;
  int max_tokens = 64;
  // Default: one response per independently built prompt (s prompts, fresh
  // demonstrations each). When set, all s responses reuse the sample-0
  // prompt, for ablating the effect of demonstration resampling.
  bool single_prompt_mode = false;

  void validate() const;
};

// Draws n_shots distinct demonstrations from pool, excluding the probed
// instance, with a generator keyed by (seed, instance_id, sample_index).
// The pool must contain at least n_shots non-probe instances.
std::vector<QaInstance> sample_demos(const std::string& instance_id,
                                     const std::vector<QaInstance>& pool, std::uint64_t seed,
                                     int sample_index, int n_shots = 3);

// A sample that still failed after the client's retry budget. The owning
// instance is excluded from the scores rather than silently zero-scored.
struct EstimateFailure {
  std::string instance_id;
  int sample_index = 0;
  std::string error;
};

struct EstimateResult {
  std::vector<KnowledgeRecord> records;
  std::vector<SampledResponse> responses;
  std::vector<EstimateFailure> failures;
};

// Collects s responses per instance (concurrently across (instance, sample)
// pairs up to config.concurrency), matches each response's first line
// against the gold answer, and averages the verdicts into an exact k/s
// score. Output order equals input order regardless of completion order.
EstimateResult estimate(const std::vector<QaInstance>& instances, const EstimationConfig& config,
                        CompletionClient& client);

// Histogram over the exact score values {k/s}.
struct ScoreBin {
  Rational score;
  std::size_t count = 0;
  double percent = 0.0;
};

// Requires every record to share one s; percentages sum to 100.
std::vector<ScoreBin> bin_scores(const std::vector<KnowledgeRecord>& records);

// Scores file IO: a header line followed by KnowledgeRecord lines.
void save_knowledge_records(const std::string& path, const nlohmann::json& header,
                            const std::vector<KnowledgeRecord>& records);
std::vector<KnowledgeRecord> load_knowledge_records(const std::string& path);

void save_sampled_responses(const std::string& path, const nlohmann::json& header,
                            const std::vector<SampledResponse>& responses);
std::vector<SampledResponse> load_sampled_responses(const std::string& path);

}  // namespace kwt
