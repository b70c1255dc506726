#include "kwt/types.hpp"

#include <cmath>

#include "kwt/errors.hpp"
#include "kwt/jsonl.hpp"
#include "kwt/text_norm.hpp"

namespace kwt {

namespace {

[[noreturn]] void bad_enum(const std::string& what, const std::string& text) {
  throw ValidationError("unknown " + what + ": '" + text + "'");
}

std::string get_string(const nlohmann::json& j, const std::string& key,
                       const std::string& context) {
  const auto& field = require_field(j, key, context);
  if (!field.is_string()) throw ParseError(context + ": field '" + key + "' must be a string");
  return field.get<std::string>();
}

bool get_bool(const nlohmann::json& j, const std::string& key, const std::string& context) {
  const auto& field = require_field(j, key, context);
  if (!field.is_boolean()) throw ParseError(context + ": field '" + key + "' must be a boolean");
  return field.get<bool>();
}

std::int64_t get_int(const nlohmann::json& j, const std::string& key,
                     const std::string& context) {
  const auto& field = require_field(j, key, context);
  if (!field.is_number_integer())
    throw ParseError(context + ": field '" + key + "' must be an integer");
  return field.get<std::int64_t>();
}

double get_double(const nlohmann::json& j, const std::string& key, const std::string& context) {
  const auto& field = require_field(j, key, context);
  if (!field.is_number()) throw ParseError(context + ": field '" + key + "' must be a number");
  return field.get<double>();
}

Rational get_rational(const nlohmann::json& j, const std::string& num_key,
                      const std::string& den_key, const std::string& context) {
  return Rational(get_int(j, num_key, context), get_int(j, den_key, context));
}

}  // namespace

std::string to_string(MatcherKind kind) {
  switch (kind) {
    case MatcherKind::em: return "em";
    case MatcherKind::rouge_l: return "rouge_l";
    case MatcherKind::llm_judge: return "llm_judge";
  }
  bad_enum("matcher", std::to_string(static_cast<int>(kind)));
}

std::string to_string(WeightStrategy strategy) {
  switch (strategy) {
    case WeightStrategy::familiarity: return "familiarity";
    case WeightStrategy::reverse_familiarity: return "reverse_familiarity";
    case WeightStrategy::uniform: return "uniform";
  }
  bad_enum("strategy", std::to_string(static_cast<int>(strategy)));
}

std::string to_string(IdkPlacement placement) {
  switch (placement) {
    case IdkPlacement::append: return "append";
    case IdkPlacement::prepend: return "prepend";
    case IdkPlacement::only: return "only";
    case IdkPlacement::none: return "none";
  }
  bad_enum("idk placement", std::to_string(static_cast<int>(placement)));
}

std::string to_string(BaselineMode mode) {
  switch (mode) {
    case BaselineMode::kwt: return "kwt";
    case BaselineMode::ft_top: return "ft_top";
    case BaselineMode::r_tuning: return "r_tuning";
    case BaselineMode::plain_sft: return "plain_sft";
  }
  bad_enum("mode", std::to_string(static_cast<int>(mode)));
}

std::string to_string(Category category) {
  switch (category) {
    case Category::A: return "A";
    case Category::B: return "B";
    case Category::C: return "C";
    case Category::D: return "D";
  }
  bad_enum("category", std::to_string(static_cast<int>(category)));
}

std::string to_string(IdkConvention convention) {
  switch (convention) {
    case IdkConvention::strip_content: return "strip_content";
    case IdkConvention::any_idk_incorrect: return "any_idk_incorrect";
  }
  bad_enum("idk convention", std::to_string(static_cast<int>(convention)));
}

MatcherKind matcher_kind_from_string(const std::string& text) {
  if (text == "em") return MatcherKind::em;
  if (text == "rouge_l" || text == "rouge") return MatcherKind::rouge_l;
  if (text == "llm_judge") return MatcherKind::llm_judge;
  bad_enum("matcher", text);
}

WeightStrategy weight_strategy_from_string(const std::string& text) {
  if (text == "familiarity") return WeightStrategy::familiarity;
  if (text == "reverse_familiarity") return WeightStrategy::reverse_familiarity;
  if (text == "uniform") return WeightStrategy::uniform;
  bad_enum("strategy", text);
}

IdkPlacement idk_placement_from_string(const std::string& text) {
  if (text == "append") return IdkPlacement::append;
  if (text == "prepend") return IdkPlacement::prepend;
  if (text == "only") return IdkPlacement::only;
  if (text == "none") return IdkPlacement::none;
  bad_enum("idk placement", text);
}

BaselineMode baseline_mode_from_string(const std::string& text) {
  if (text == "kwt") return BaselineMode::kwt;
  if (text == "ft_top") return BaselineMode::ft_top;
  if (text == "r_tuning") return BaselineMode::r_tuning;
  if (text == "plain_sft") return BaselineMode::plain_sft;
  bad_enum("mode", text);
}

Category category_from_string(const std::string& text) {
  if (text == "A") return Category::A;
  if (text == "B") return Category::B;
  if (text == "C") return Category::C;
  if (text == "D") return Category::D;
  bad_enum("category", text);
}

IdkConvention idk_convention_from_string(const std::string& text) {
  if (text == "strip_content" || text == "strip") return IdkConvention::strip_content;
  if (text == "any_idk_incorrect" || text == "strict") return IdkConvention::any_idk_incorrect;
  bad_enum("idk convention", text);
}

Category categorize_flags(bool has_idk, bool content_correct) {
  if (has_idk) return content_correct ? Category::A : Category::B;
  return content_correct ? Category::C : Category::D;
}

nlohmann::json to_json(const QaInstance& v) {
  nlohmann::json j;
  j["id"] = v.id;
  j["question"] = v.question;
  j["gold_response"] = v.gold_response;
  if (v.knowledge.has_value()) j["knowledge"] = *v.knowledge;
  if (v.answerable.has_value()) j["answerable"] = *v.answerable;
  j["dataset_tag"] = v.dataset_tag;
  return j;
}

QaInstance qa_instance_from_json(const nlohmann::json& j) {
  const std::string ctx = "QaInstance";
  QaInstance v;
  v.id = get_string(j, "id", ctx);
  v.question = get_string(j, "question", ctx);
  v.gold_response = get_string(j, "gold_response", ctx);
  if (j.contains("knowledge")) {
    if (!j["knowledge"].is_string()) throw ParseError(ctx + ": field 'knowledge' must be a string");
    v.knowledge = j["knowledge"].get<std::string>();
  }
  if (j.contains("answerable")) {
    if (!j["answerable"].is_boolean())
      throw ParseError(ctx + ": field 'answerable' must be a boolean");
    v.answerable = j["answerable"].get<bool>();
  }
  if (j.contains("dataset_tag")) {
    if (!j["dataset_tag"].is_string())
      throw ParseError(ctx + ": field 'dataset_tag' must be a string");
    v.dataset_tag = j["dataset_tag"].get<std::string>();
  }
  if (v.id.empty()) throw ValidationError(ctx + ": empty id");
  if (trim(v.question).empty()) throw ValidationError(ctx + ": empty question for id '" + v.id + "'");
  if (trim(v.gold_response).empty())
    throw ValidationError(ctx + ": empty gold_response for id '" + v.id + "'");
  return v;
}

nlohmann::json to_json(const SampledResponse& v) {
  nlohmann::json j;
  j["instance_id"] = v.instance_id;
  j["sample_index"] = v.sample_index;
  j["response_text"] = v.response_text;
  j["demo_ids"] = v.demo_ids;
  j["temperature"] = v.temperature;
  return j;
}

SampledResponse sampled_response_from_json(const nlohmann::json& j) {
  const std::string ctx = "SampledResponse";
  SampledResponse v;
  v.instance_id = get_string(j, "instance_id", ctx);
  v.sample_index = static_cast<int>(get_int(j, "sample_index", ctx));
  v.response_text = get_string(j, "response_text", ctx);
  const auto& demos = require_field(j, "demo_ids", ctx);
  if (!demos.is_array()) throw ParseError(ctx + ": field 'demo_ids' must be an array");
  for (const auto& d : demos) {
    if (!d.is_string()) throw ParseError(ctx + ": demo_ids entries must be strings");
    v.demo_ids.push_back(d.get<std::string>());
  }
  v.temperature = get_double(j, "temperature", ctx);
  if (v.sample_index < 0) throw ValidationError(ctx + ": negative sample_index");
  for (const auto& d : v.demo_ids) {
    if (d == v.instance_id)
      throw ValidationError(ctx + ": demo_ids contains the probed instance '" + d + "'");
  }
  return v;
}

nlohmann::json to_json(const KnowledgeRecord& v) {
  nlohmann::json j;
  j["instance_id"] = v.instance_id;
  j["matcher"] = to_string(v.matcher);
  j["verdicts"] = v.verdicts;
  j["s"] = v.s;
  j["score_num"] = v.score.num();
  j["score_den"] = v.score.den();
  j["score"] = v.score.to_double();
  return j;
}

KnowledgeRecord knowledge_record_from_json(const nlohmann::json& j) {
  const std::string ctx = "KnowledgeRecord";
  KnowledgeRecord v;
  v.instance_id = get_string(j, "instance_id", ctx);
  v.matcher = matcher_kind_from_string(get_string(j, "matcher", ctx));
  const auto& verdicts = require_field(j, "verdicts", ctx);
  if (!verdicts.is_array()) throw ParseError(ctx + ": field 'verdicts' must be an array");
  for (const auto& b : verdicts) {
    if (!b.is_boolean()) throw ParseError(ctx + ": verdicts entries must be booleans");
    v.verdicts.push_back(b.get<bool>());
  }
  v.s = static_cast<int>(get_int(j, "s", ctx));
  v.score = get_rational(j, "score_num", "score_den", ctx);
  if (v.s < 1) throw ValidationError(ctx + ": s must be >= 1");
  if (v.verdicts.size() != static_cast<std::size_t>(v.s))
    throw ValidationError(ctx + ": verdict count differs from s for instance '" + v.instance_id +
                          "'");
  std::int64_t k = 0;
  for (bool b : v.verdicts) k += b ? 1 : 0;
  if (v.score != Rational(k, v.s))
    throw ValidationError(ctx + ": score is not (true verdicts)/s for instance '" +
                          v.instance_id + "'");
  return v;
}

nlohmann::json to_json(const WeightedExample& v) {
  nlohmann::json j;
  j["instance_id"] = v.instance_id;
  j["prompt"] = v.prompt;
  j["target"] = v.target;
  j["weight_num"] = v.weight.num();
  j["weight_den"] = v.weight.den();
  j["weight"] = v.weight.to_double();
  j["has_idk"] = v.has_idk;
  j["strategy"] = to_string(v.strategy);
  j["idk_placement"] = to_string(v.idk_placement);
  return j;
}

WeightedExample weighted_example_from_json(const nlohmann::json& j) {
  const std::string ctx = "WeightedExample";
  WeightedExample v;
  v.instance_id = get_string(j, "instance_id", ctx);
  v.prompt = get_string(j, "prompt", ctx);
  v.target = get_string(j, "target", ctx);
  v.weight = get_rational(j, "weight_num", "weight_den", ctx);
  v.has_idk = get_bool(j, "has_idk", ctx);
  v.strategy = weight_strategy_from_string(get_string(j, "strategy", ctx));
  v.idk_placement = idk_placement_from_string(get_string(j, "idk_placement", ctx));
  if (v.weight <= Rational(0, 1) || v.weight > Rational(1, 1))
    throw ValidationError(ctx + ": weight outside (0,1] for instance '" + v.instance_id + "'");
  if (v.has_idk != contains_idk(v.target))
    throw ValidationError(ctx + ": has_idk flag disagrees with target for instance '" +
                          v.instance_id + "'");
  return v;
}

nlohmann::json to_json(const OutcomeRecord& v) {
  nlohmann::json j;
  j["instance_id"] = v.instance_id;
  j["response_text"] = v.response_text;
  j["has_idk"] = v.has_idk;
  j["content_correct"] = v.content_correct;
  j["category"] = to_string(v.category);
  return j;
}

OutcomeRecord outcome_record_from_json(const nlohmann::json& j) {
  const std::string ctx = "OutcomeRecord";
  OutcomeRecord v;
  v.instance_id = get_string(j, "instance_id", ctx);
  v.response_text = get_string(j, "response_text", ctx);
  v.has_idk = get_bool(j, "has_idk", ctx);
  v.content_correct = get_bool(j, "content_correct", ctx);
  v.category = category_from_string(get_string(j, "category", ctx));
  if (v.category != categorize_flags(v.has_idk, v.content_correct))
    throw ValidationError(ctx + ": category disagrees with flags for instance '" +
                          v.instance_id + "'");
  return v;
}

nlohmann::json to_json(const HumanLabel& v) {
  nlohmann::json j;
  j["instance_id"] = v.instance_id;
  j["sample_index"] = v.sample_index;
  j["correct"] = v.correct;
  return j;
}

HumanLabel human_label_from_json(const nlohmann::json& j) {
  const std::string ctx = "HumanLabel";
  HumanLabel v;
  v.instance_id = get_string(j, "instance_id", ctx);
  v.sample_index = static_cast<int>(get_int(j, "sample_index", ctx));
  v.correct = get_bool(j, "correct", ctx);
  return v;
}

}  // namespace kwt
