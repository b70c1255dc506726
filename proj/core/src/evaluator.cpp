#include "kwt/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <unordered_map>

#include "kwt/errors.hpp"
#include "kwt/jsonl.hpp"
#include "kwt/prompt.hpp"
#include "kwt/text_norm.hpp"

namespace kwt {

void EvalConfig::validate() const {
  if (temperature < 0.0) throw ValidationError("evaluation temperature must be >= 0");
  if (max_tokens < 1) throw ValidationError("evaluation max_tokens must be >= 1");
  if (concurrency < 1) throw ValidationError("evaluation concurrency must be >= 1");
  matcher.validate();
}

EvalResult evaluate(const std::vector<QaInstance>& test_set, const EvalConfig& config,
                    CompletionClient& client) {
  config.validate();
  if (test_set.empty()) throw ValidationError("evaluate over an empty test set");

  Matcher matcher(config.matcher);

  struct Slot {
    bool ok = false;
    OutcomeRecord outcome;
    std::string error;
  };
  std::vector<Slot> slots(test_set.size());

  std::atomic<std::size_t> next_task{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next_task.fetch_add(1);
      if (i >= test_set.size()) return;
      const QaInstance& instance = test_set[i];
      Slot& slot = slots[i];
      try {
        CompletionParams params;
        params.temperature = config.temperature;
        params.max_tokens = config.max_tokens;
        params.stop = {"\nQuestion:"};
        params.seed = 0;
        std::string raw = client.complete(render_task_prompt(instance, config.include_knowledge),
                                          params);
        std::string response = first_line(raw);
        if (config.suppress_idk) response = strip_idk(response);
        slot.outcome = categorize(response, instance, matcher, config.idk_convention);
        slot.ok = true;
      } catch (const std::exception& e) {
        slot.error = e.what();
      }
    }
  };

  const std::size_t pool_size = std::min<std::size_t>(
      static_cast<std::size_t>(config.concurrency), test_set.size());
  std::vector<std::thread> workers;
  workers.reserve(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) workers.emplace_back(worker);
  for (auto& w : workers) w.join();

  EvalResult result;
  bool labeled = !test_set.empty() && test_set.front().answerable.has_value();
  Counts ans, unans;
  for (std::size_t i = 0; i < test_set.size(); ++i) {
    if (!slots[i].ok) {
      result.failures.push_back({test_set[i].id, slots[i].error});
      continue;
    }
    result.outcomes.push_back(slots[i].outcome);
  }
  result.counts = Counts::from_outcomes(result.outcomes);
  if (labeled) {
    std::vector<QaInstance> succeeded;
    succeeded.reserve(result.outcomes.size());
    std::unordered_map<std::string, const QaInstance*> by_id;
    for (const auto& instance : test_set) by_id[instance.id] = &instance;
    for (const auto& outcome : result.outcomes) succeeded.push_back(*by_id[outcome.instance_id]);
    std::tie(ans, unans) = answerability_split(result.outcomes, succeeded);
    result.counts_answerable = ans;
    result.counts_unanswerable = unans;
  }
  return result;
}

std::pair<Counts, Counts> answerability_split(const std::vector<OutcomeRecord>& outcomes,
                                              const std::vector<QaInstance>& instances) {
  std::unordered_map<std::string, bool> label_by_id;
  for (const auto& instance : instances) {
    if (!instance.answerable.has_value()) {
      throw ValidationError("answerability_split: instance '" + instance.id +
                            "' has no answerable label");
    }
    label_by_id[instance.id] = *instance.answerable;
  }

  Counts ans, unans;
  for (const auto& outcome : outcomes) {
    auto it = label_by_id.find(outcome.instance_id);
    if (it == label_by_id.end()) {
      throw ValidationError("answerability_split: no instance for outcome '" +
                            outcome.instance_id + "'");
    }
    Counts& target = it->second ? ans : unans;
    switch (outcome.category) {
      case Category::A: ++target.a; break;
      case Category::B: ++target.b; break;
      case Category::C: ++target.c; break;
      case Category::D: ++target.d; break;
    }
  }
  return {ans, unans};
}

void save_outcomes(const std::string& path, const nlohmann::json& header,
                   const std::vector<OutcomeRecord>& outcomes) {
  std::vector<nlohmann::json> lines;
  lines.reserve(outcomes.size());
  for (const auto& outcome : outcomes) lines.push_back(to_json(outcome));
  write_jsonl(path, header, lines);
}

std::vector<OutcomeRecord> load_outcomes(const std::string& path) {
  std::vector<OutcomeRecord> outcomes;
  for (const auto& j : read_jsonl_records(path)) {
    outcomes.push_back(outcome_record_from_json(j));
  }
  return outcomes;
}

}  // namespace kwt
