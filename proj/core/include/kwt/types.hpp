#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kwt/rational.hpp"

namespace kwt {

enum class MatcherKind { em, rouge_l, llm_judge };
enum class WeightStrategy { familiarity, reverse_familiarity, uniform };
enum class IdkPlacement { append, prepend, only, none };
enum class BaselineMode { kwt, ft_top, r_tuning, plain_sft };
enum class Category { A, B, C, D };
enum class IdkConvention { strip_content, any_idk_incorrect };

std::string to_string(MatcherKind kind);
std::string to_string(WeightStrategy strategy);
std::string to_string(IdkPlacement placement);
std::string to_string(BaselineMode mode);
std::string to_string(Category category);
std::string to_string(IdkConvention convention);

MatcherKind matcher_kind_from_string(const std::string& text);
WeightStrategy weight_strategy_from_string(const std::string& text);
IdkPlacement idk_placement_from_string(const std::string& text);
BaselineMode baseline_mode_from_string(const std::string& text);
Category category_from_string(const std::string& text);
IdkConvention idk_convention_from_string(const std::string& text);

// Maps the (has_idk, content_correct) pair onto the four outcome categories:
// A = abstained though correct, B = abstained and incorrect, C = answered
// correctly, D = answered incorrectly.
Category categorize_flags(bool has_idk, bool content_correct);

// One question with its gold response. knowledge and answerable are omitted
// from files when absent, never null.
struct QaInstance {
  std::string id;
  std::string question;
  std::string gold_response;
  std::optional<std::string> knowledge;
  std::optional<bool> answerable;
  std::string dataset_tag;

  bool operator==(const QaInstance&) const = default;
};

// One raw sampled model response, kept for cache replay and audit. demo_ids
// records which few-shot demonstrations built the prompt.
struct SampledResponse {
  std::string instance_id;
  int sample_index = 0;
  std::string response_text;
  std::vector<std::string> demo_ids;
  double temperature = 0.0;

  bool operator==(const SampledResponse&) const = default;
};

// Per-instance knowledge score: the fraction of s sampled responses the
// matcher judged correct, kept as an exact rational k/s.
struct KnowledgeRecord {
  std::string instance_id;
  MatcherKind matcher = MatcherKind::em;
  std::vector<bool> verdicts;
  Rational score;
  int s = 0;

  bool operator==(const KnowledgeRecord&) const = default;
};

// One training example with its loss weight. The weight is stored as an
// exact rational plus a decimal convenience field in files.
struct WeightedExample {
  std::string instance_id;
  std::string prompt;
  std::string target;
  Rational weight;
  bool has_idk = false;
  WeightStrategy strategy = WeightStrategy::uniform;
  IdkPlacement idk_placement = IdkPlacement::none;

  bool operator==(const WeightedExample&) const = default;
};

// One evaluated response with its abstention flag, content-correctness
// verdict, and outcome category.
struct OutcomeRecord {
  std::string instance_id;
  std::string response_text;
  bool has_idk = false;
  bool content_correct = false;
  Category category = Category::D;

  bool operator==(const OutcomeRecord&) const = default;
};

// One human correctness judgment for a sampled response, used for the
// metric-vs-human agreement computation.
struct HumanLabel {
  std::string instance_id;
  int sample_index = 0;
  bool correct = false;

  bool operator==(const HumanLabel&) const = default;
};

nlohmann::json to_json(const QaInstance& v);
nlohmann::json to_json(const SampledResponse& v);
nlohmann::json to_json(const KnowledgeRecord& v);
nlohmann::json to_json(const WeightedExample& v);
nlohmann::json to_json(const OutcomeRecord& v);
nlohmann::json to_json(const HumanLabel& v);

// Strict parsers: missing or mistyped fields raise ParseError; violated
// domain invariants raise ValidationError.
QaInstance qa_instance_from_json(const nlohmann::json& j);
SampledResponse sampled_response_from_json(const nlohmann::json& j);
KnowledgeRecord knowledge_record_from_json(const nlohmann::json& j);
WeightedExample weighted_example_from_json(const nlohmann::json& j);
OutcomeRecord outcome_record_from_json(const nlohmann::json& j);
HumanLabel human_label_from_json(const nlohmann::json& j);

}  // namespace kwt
