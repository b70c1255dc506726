#include "kwt/builder.hpp"

#include <unordered_map>

#include "kwt/errors.hpp"
#include "kwt/prompt.hpp"
#include "kwt/text_norm.hpp"
#include "kwt/version.hpp"

namespace kwt {

void BuildConfig::validate() const {
  if (idk_threshold < Rational(0, 1) || idk_threshold >= Rational(1, 1)) {
    throw ValidationError("idk_threshold must lie in [0,1)");
  }
}

Rational weight(const Rational& score, int s, WeightStrategy strategy) {
  if (s < 1) throw ValidationError("weight: s must be >= 1");
  if (score < Rational(0, 1) || score > Rational(1, 1)) {
    throw ValidationError("weight: score must lie in [0,1]");
  }
  Rational s_r = Rational::from_int(s);
  Rational one = Rational::from_int(1);
  switch (strategy) {
    case WeightStrategy::familiarity:
      return (s_r * score + one) / (s_r + one);
    case WeightStrategy::reverse_familiarity:
      return one - (s_r * score) / (s_r + one);
    case WeightStrategy::uniform:
      return one;
  }
  throw ValidationError("unhandled weight strategy");
}

std::string render_target(const std::string& gold, IdkPlacement placement, bool is_unknown) {
  if (contains_idk(gold)) {
    throw ValidationError("gold response contains the reserved <IDK> literal");
  }
  if (!is_unknown || placement == IdkPlacement::none) return gold;
  switch (placement) {
    case IdkPlacement::append: return gold + " " + kIdkToken;
    case IdkPlacement::prepend: return std::string(kIdkToken) + " " + gold;
    case IdkPlacement::only: return kIdkToken;
    case IdkPlacement::none: return gold;
  }
  throw ValidationError("unhandled idk placement");
}

std::vector<WeightedExample> build(const std::vector<QaInstance>& instances,
                                   const std::vector<KnowledgeRecord>& records,
                                   const BuildConfig& config) {
  config.validate();
  if (records.empty()) throw ValidationError("build: no knowledge records");

  int s = records.front().s;
  MatcherKind matcher = records.front().matcher;
  std::unordered_map<std::string, const KnowledgeRecord*> by_id;
  for (const auto& record : records) {
    if (record.s != s) throw ValidationError("build: knowledge records mix different s values");
    if (record.matcher != matcher) {
      throw ValidationError("build: knowledge records mix different matchers");
    }
    by_id[record.instance_id] = &record;
  }

  std::vector<WeightedExample> examples;
  examples.reserve(instances.size());
  for (const auto& instance : instances) {
    auto it = by_id.find(instance.id);
    if (it == by_id.end()) {
      throw ValidationError("build: no knowledge record for instance '" + instance.id + "'");
    }
    const Rational& score = it->second->score;
    bool unknown = score <= config.idk_threshold;

    WeightedExample example;
    example.instance_id = instance.id;
    example.prompt = render_task_prompt(instance, config.include_knowledge_field);

    switch (config.baseline_mode) {
      case BaselineMode::kwt:
        example.strategy = config.strategy;
        example.weight = weight(score, s, config.strategy);
        example.idk_placement = config.idk_placement;
        example.target = render_target(instance.gold_response, config.idk_placement, unknown);
        break;
      case BaselineMode::ft_top:
        if (unknown) continue;
        example.strategy = WeightStrategy::uniform;
        example.weight = Rational::from_int(1);
        example.idk_placement = IdkPlacement::none;
        example.target = instance.gold_response;
        break;
      case BaselineMode::r_tuning:
        example.strategy = WeightStrategy::uniform;
        example.weight = Rational::from_int(1);
        example.idk_placement = IdkPlacement::append;
        example.target = render_target(instance.gold_response, IdkPlacement::append, unknown);
        break;
      case BaselineMode::plain_sft:
        example.strategy = WeightStrategy::uniform;
        example.weight = Rational::from_int(1);
        example.idk_placement = IdkPlacement::none;
        example.target = instance.gold_response;
        break;
    }
    example.has_idk = contains_idk(example.target);
    examples.push_back(std::move(example));
  }
  return examples;
}

double weighted_nll(const std::vector<std::vector<double>>& token_logprobs,
                    const std::vector<Rational>& weights,
                    bool global_token_normalization) {
  if (token_logprobs.empty()) throw ValidationError("weighted_nll: empty batch");
  if (token_logprobs.size() != weights.size()) {
    throw ValidationError("weighted_nll: weight count differs from sample count");
  }

  double weighted_sum = 0.0;
  std::size_t total_tokens = 0;
  for (std::size_t i = 0; i < token_logprobs.size(); ++i) {
    const auto& sample = token_logprobs[i];
    if (sample.empty()) {
      throw ValidationError("weighted_nll: sample " + std::to_string(i) + " has no tokens");
    }
    total_tokens += sample.size();
    double sample_sum = 0.0;
    for (double logp : sample) sample_sum += logp;
    double w = weights[i].to_double();
    if (global_token_normalization) {
      weighted_sum += w * sample_sum;
    } else {
      weighted_sum += w * sample_sum / static_cast<double>(sample.size());
    }
  }

  double denom = global_token_normalization ? static_cast<double>(total_tokens)
                                            : static_cast<double>(token_logprobs.size());
  return -weighted_sum / denom;
}

}  // namespace kwt
