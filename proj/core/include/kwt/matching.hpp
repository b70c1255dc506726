#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kwt/completion.hpp"
#include "kwt/types.hpp"

namespace kwt {

// Configuration for one correctness function f(candidate, gold).
struct MatcherConfig {
  MatcherKind kind = MatcherKind::em;
  // rouge_l only. When unset, the per-dataset default for the instance's
  // dataset_tag applies (halueval 0.35, medqa 0.6, sciq 0.6, fallback 0.6).
  std::optional<double> rouge_threshold;
  // rouge_l only: use a strict > comparison instead of the default >=.
  bool rouge_threshold_exclusive = false;
  // llm_judge only.
  std::shared_ptr<CompletionClient> judge_client;
  // llm_judge only: pass the instance's knowledge paragraph to the judge.
  bool include_knowledge = false;

  void validate() const;
};

// True iff both sides normalize to the same string.
bool em_match(const std::string& candidate, const std::string& gold);

// ROUGE-L F1 over normalized token sequences. Empty candidate or gold gives
// 0, unless both are empty (1). Symmetric in its arguments.
double rouge_l_f1(const std::string& candidate, const std::string& gold);

// Thresholded ROUGE-L. The comparison is inclusive (>=) by default so that a
// 0.6 threshold admits an exact-0.6 match; exclusive mode is a flag.
bool rouge_match(const std::string& candidate, const std::string& gold, double threshold,
                 bool exclusive = false);

// Default ROUGE-L threshold for a dataset tag: halueval 0.35, medqa 0.6,
// sciq 0.6; unknown tags fall back to 0.6.
double default_rouge_threshold(const std::string& dataset_tag);

// Asks a judge endpoint whether candidate and gold are semantically
// equivalent answers to question. Sent as a single request at temperature 0;
// the reply's leading token decides, case-insensitively ("yes" -> true,
// "no" -> false); anything else raises JudgeProtocolError.
bool judge_match(const std::string& question, const std::optional<std::string>& knowledge,
                 const std::string& gold, const std::string& candidate, CompletionClient& judge);

// Facade dispatching to the configured correctness function. Thread-safe as
// long as the judge client is.
class Matcher {
 public:
  explicit Matcher(MatcherConfig config);

  bool match(const QaInstance& instance, const std::string& candidate) const;
  const MatcherConfig& config() const { return config_; }
  double resolve_rouge_threshold(const QaInstance& instance) const;

 private:
  MatcherConfig config_;
};

// Categorizes one model response against its gold instance: has_idk is a
// literal "<IDK>" substring test; content correctness is judged on the
// response with <IDK> stripped, or forced false for abstentions under the
// any_idk_incorrect convention.
OutcomeRecord categorize(const std::string& response_text, const QaInstance& gold,
                         const Matcher& matcher,
                         IdkConvention convention = IdkConvention::strip_content);

// Percent agreement between matcher verdicts and human labels.
struct Agreement {
  double accuracy_percent = 0.0;
  double f1_percent = 0.0;
};

// Positionwise accuracy and F1 (with "correct" as the positive class), both
// in percent. Empty or unequal-length vectors are rejected. When neither
// side contains a positive the F1 is vacuously 100; otherwise an undefined
// precision or recall counts as 0.
Agreement agreement(const std::vector<bool>& verdicts, const std::vector<bool>& labels);

// Joins verdicts keyed by (instance_id, sample_index) with human labels and
// computes agreement. Labels without a matching verdict are an error.
Agreement agreement_against_labels(
    const std::map<std::pair<std::string, int>, bool>& verdicts,
    const std::vector<HumanLabel>& labels);

// Loads a human-label file, rejecting duplicate (instance_id, sample_index).
std::vector<HumanLabel> load_human_labels(const std::string& path);

// Agreement of thresholded ROUGE-L against human labels across a caller
// supplied threshold grid, for picking the best-agreeing threshold.
struct ThresholdAgreement {
  double threshold = 0.0;
  Agreement agreement;
};
std::vector<ThresholdAgreement> rouge_threshold_sweep(
    const std::vector<std::pair<std::string, std::string>>& candidate_gold_pairs,
    const std::vector<bool>& labels, const std::vector<double>& grid);

}  // namespace kwt
