#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kwt/completion.hpp"
#include "kwt/matching.hpp"
#include "kwt/metrics.hpp"
#include "kwt/types.hpp"

namespace kwt {

// Test-time evaluation settings. Decoding defaults to temperature 0 with a
// single response per instance, so mock-backed runs are fully deterministic.
struct EvalConfig {
  MatcherConfig matcher;
  bool include_knowledge = false;
  IdkConvention idk_convention = IdkConvention::strip_content;
  // Deployment mode: strip "<IDK>" from responses before categorizing,
  // using the tuned model as a plain answer generator. Post-hoc text-level
  // stripping stands in for decode-time token suppression.
  bool suppress_idk = false;
  std::uint64_t seed = 0;
  double temperature = 0.0;
  int max_tokens = 64;
  int concurrency = 4;

  void validate() const;
};

struct EvalFailure {
  std::string instance_id;
  std::string error;
};

struct EvalResult {
  std::vector<OutcomeRecord> outcomes;
  Counts counts;
  std::optional<Counts> counts_answerable;
  std::optional<Counts> counts_unanswerable;
  std::vector<EvalFailure> failures;
};

// One response per instance, categorized and aggregated. Responses are
// truncated at their first line before categorization (continuation models
// run on into the next question block). When the test set carries
// answerable labels the per-split counts are filled in as well.
EvalResult evaluate(const std::vector<QaInstance>& test_set, const EvalConfig& config,
                    CompletionClient& client);

// Partitions outcome counts by the instances' answerable labels, which must
// all be present.
std::pair<Counts, Counts> answerability_split(const std::vector<OutcomeRecord>& outcomes,
                                              const std::vector<QaInstance>& instances);

void save_outcomes(const std::string& path, const nlohmann::json& header,
                   const std::vector<OutcomeRecord>& outcomes);
std::vector<OutcomeRecord> load_outcomes(const std::string& path);

}  // namespace kwt
