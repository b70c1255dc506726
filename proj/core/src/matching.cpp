#include "kwt/matching.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "kwt/errors.hpp"
#include "kwt/jsonl.hpp"
#include "kwt/prompt.hpp"
#include "kwt/text_norm.hpp"

namespace kwt {

namespace {

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> curr(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        curr[j] = prev[j - 1] + 1;
      } else {
        curr[j] = std::max(prev[j], curr[j - 1]);
      }
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

}  // namespace

void MatcherConfig::validate() const {
  if (kind != MatcherKind::rouge_l && rouge_threshold.has_value()) {
    throw ValidationError("rouge_threshold is only valid for the rouge_l matcher");
  }
  if (rouge_threshold.has_value() && (*rouge_threshold <= 0.0 || *rouge_threshold > 1.0)) {
    throw ValidationError("rouge_threshold must lie in (0,1]");
  }
  if (kind == MatcherKind::llm_judge && !judge_client) {
    throw ValidationError("llm_judge matcher requires a judge endpoint");
  }
  if (kind != MatcherKind::llm_judge && judge_client) {
    throw ValidationError("judge endpoint is only valid for the llm_judge matcher");
  }
}

bool em_match(const std::string& candidate, const std::string& gold) {
  return normalize(candidate) == normalize(gold);
}

double rouge_l_f1(const std::string& candidate, const std::string& gold) {
  auto c = normalize_tokens(candidate);
  auto g = normalize_tokens(gold);
  if (c.empty() && g.empty()) return 1.0;
  if (c.empty() || g.empty()) return 0.0;
  std::size_t l = lcs_length(c, g);
  if (l == 0) return 0.0;
  double p = static_cast<double>(l) / static_cast<double>(c.size());
  double r = static_cast<double>(l) / static_cast<double>(g.size());
  return 2.0 * p * r / (p + r);
}

bool rouge_match(const std::string& candidate, const std::string& gold, double threshold,
                 bool exclusive) {
  double f1 = rouge_l_f1(candidate, gold);
  return exclusive ? f1 > threshold : f1 >= threshold;
}

double default_rouge_threshold(const std::string& dataset_tag) {
  if (dataset_tag == "halueval") return 0.35;
  if (dataset_tag == "medqa") return 0.6;
  if (dataset_tag == "sciq") return 0.6;
  return 0.6;
}

bool judge_match(const std::string& question, const std::optional<std::string>& knowledge,
                 const std::string& gold, const std::string& candidate,
                 CompletionClient& judge) {
  CompletionParams params;
  params.temperature = 0.0;
  params.max_tokens = 8;
  std::string reply = judge.complete(render_judge_prompt(question, knowledge, gold, candidate),
                                     params);

  std::string token;
  for (char c : trim(reply)) {
    if (std::isalpha(static_cast<unsigned char>(c)) == 0) break;
    token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (token == "yes") return true;
  if (token == "no") return false;
  throw JudgeProtocolError("judge reply is neither yes nor no", reply);
}

Matcher::Matcher(MatcherConfig config) : config_(std::move(config)) { config_.validate(); }

double Matcher::resolve_rouge_threshold(const QaInstance& instance) const {
  if (config_.rouge_threshold.has_value()) return *config_.rouge_threshold;
  return default_rouge_threshold(instance.dataset_tag);
}

bool Matcher::match(const QaInstance& instance, const std::string& candidate) const {
  switch (config_.kind) {
    case MatcherKind::em:
      return em_match(candidate, instance.gold_response);
    case MatcherKind::rouge_l:
      return rouge_match(candidate, instance.gold_response, resolve_rouge_threshold(instance),
                         config_.rouge_threshold_exclusive);
    case MatcherKind::llm_judge: {
      std::optional<std::string> knowledge;
      if (config_.include_knowledge) knowledge = instance.knowledge;
      return judge_match(instance.question, knowledge, instance.gold_response, candidate,
                         *config_.judge_client);
    }
  }
  throw ValidationError("unhandled matcher kind");
}

OutcomeRecord categorize(const std::string& response_text, const QaInstance& gold,
                         const Matcher& matcher, IdkConvention convention) {
  OutcomeRecord outcome;
  outcome.instance_id = gold.id;
  outcome.response_text = response_text;
  outcome.has_idk = contains_idk(response_text);
  bool correct = matcher.match(gold, strip_idk(response_text));
  if (convention == IdkConvention::any_idk_incorrect && outcome.has_idk) correct = false;
  outcome.content_correct = correct;
  outcome.category = categorize_flags(outcome.has_idk, outcome.content_correct);
  return outcome;
}

Agreement agreement(const std::vector<bool>& verdicts, const std::vector<bool>& labels) {
  if (verdicts.empty()) throw ValidationError("agreement over empty vectors");
  if (verdicts.size() != labels.size()) {
    throw ValidationError("agreement inputs differ in length: " +
                          std::to_string(verdicts.size()) + " vs " +
                          std::to_string(labels.size()));
  }

  std::size_t matches = 0, tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    if (verdicts[i] == labels[i]) ++matches;
    if (verdicts[i] && labels[i]) ++tp;
    if (verdicts[i] && !labels[i]) ++fp;
    if (!verdicts[i] && labels[i]) ++fn;
  }

  Agreement result;
  result.accuracy_percent =
      100.0 * static_cast<double>(matches) / static_cast<double>(verdicts.size());
  if (tp + fp == 0 && tp + fn == 0) {
    result.f1_percent = 100.0;
    return result;
  }
  double precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  double recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  result.f1_percent =
      (precision + recall) > 0.0 ? 100.0 * 2.0 * precision * recall / (precision + recall) : 0.0;
  return result;
}

Agreement agreement_against_labels(
    const std::map<std::pair<std::string, int>, bool>& verdicts,
    const std::vector<HumanLabel>& labels) {
  std::vector<bool> v, l;
  v.reserve(labels.size());
  l.reserve(labels.size());
  for (const auto& label : labels) {
    auto it = verdicts.find({label.instance_id, label.sample_index});
    if (it == verdicts.end()) {
      throw ValidationError("no verdict for labeled response (" + label.instance_id + ", " +
                            std::to_string(label.sample_index) + ")");
    }
    v.push_back(it->second);
    l.push_back(label.correct);
  }
  return agreement(v, l);
}

std::vector<HumanLabel> load_human_labels(const std::string& path) {
  auto records = read_jsonl_records(path);
  std::vector<HumanLabel> labels;
  labels.reserve(records.size());
  std::set<std::pair<std::string, int>> seen;
  for (const auto& record : records) {
    HumanLabel label = human_label_from_json(record);
    if (!seen.insert({label.instance_id, label.sample_index}).second) {
      throw ValidationError(path + ": duplicate label for (" + label.instance_id + ", " +
                            std::to_string(label.sample_index) + ")");
    }
    labels.push_back(std::move(label));
  }
  return labels;
}

std::vector<ThresholdAgreement> rouge_threshold_sweep(
    const std::vector<std::pair<std::string, std::string>>& candidate_gold_pairs,
    const std::vector<bool>& labels, const std::vector<double>& grid) {
  if (candidate_gold_pairs.size() != labels.size()) {
    throw ValidationError("threshold sweep inputs differ in length");
  }
  if (grid.empty()) throw ValidationError("threshold sweep over an empty grid");

  std::vector<double> f1s;
  f1s.reserve(candidate_gold_pairs.size());
  for (const auto& [candidate, gold] : candidate_gold_pairs) {
    f1s.push_back(rouge_l_f1(candidate, gold));
  }

  std::vector<ThresholdAgreement> results;
  results.reserve(grid.size());
  for (double threshold : grid) {
    std::vector<bool> verdicts;
    verdicts.reserve(f1s.size());
    for (double f1 : f1s) verdicts.push_back(f1 >= threshold);
    results.push_back({threshold, agreement(verdicts, labels)});
  }
  return results;
}

}  // namespace kwt
