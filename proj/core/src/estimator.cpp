#include "kwt/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <unordered_set>

#include "kwt/errors.hpp"
#include "kwt/jsonl.hpp"
#include "kwt/prompt.hpp"
#include "kwt/rng.hpp"
#include "kwt/text_norm.hpp"

namespace kwt {

void EstimationConfig::validate() const {
  if (s < 1) throw ValidationError("estimation s must be >= 1");
  if (n_shots < 0) throw ValidationError("estimation n_shots must be >= 0");
  if (temperature < 0.0) throw ValidationError("estimation temperature must be >= 0");
  if (concurrency < 1) throw ValidationError("estimation concurrency must be >= 1");
  if (max_tokens < 1) throw ValidationError("estimation max_tokens must be >= 1");
  matcher.validate();
}

std::vector<QaInstance> sample_demos(const std::string& instance_id,
                                     const std::vector<QaInstance>& pool, std::uint64_t seed,
                                     int sample_index, int n_shots) {
  if (n_shots < 0) throw ValidationError("sample_demos: n_shots must be >= 0");
  std::vector<std::size_t> candidates;
  candidates.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].id != instance_id) candidates.push_back(i);
  }
  if (candidates.size() < static_cast<std::size_t>(n_shots)) {
    throw ValidationError("demo pool has only " + std::to_string(candidates.size()) +
                          " non-probe instances, need " + std::to_string(n_shots));
  }

  RngKey key(seed);
  key.part(instance_id).part(static_cast<std::uint64_t>(sample_index));
  SplitMix64 rng(key);

  // Partial Fisher-Yates: the first n_shots slots end up a uniform draw
  // without replacement, in generator order.
  std::vector<QaInstance> demos;
  demos.reserve(static_cast<std::size_t>(n_shots));
  for (int k = 0; k < n_shots; ++k) {
    std::size_t i = static_cast<std::size_t>(k);
    std::size_t j = i + rng.next_below(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
    demos.push_back(pool[candidates[i]]);
  }
  return demos;
}

EstimateResult estimate(const std::vector<QaInstance>& instances, const EstimationConfig& config,
                        CompletionClient& client) {
  config.validate();
  {
    std::unordered_set<std::string> ids;
    for (const auto& instance : instances) {
      if (!ids.insert(instance.id).second) {
        throw ValidationError("estimate: duplicate instance id '" + instance.id + "'");
      }
    }
  }

  Matcher matcher(config.matcher);
  const std::size_t n = instances.size();
  const std::size_t s = static_cast<std::size_t>(config.s);

  struct SampleSlot {
    bool ok = false;
    bool verdict = false;
    SampledResponse response;
    std::string error;
  };
  std::vector<std::vector<SampleSlot>> slots(n, std::vector<SampleSlot>(s));

  // Flat task list over (instance, sample) pairs, pulled by a worker pool.
  // Each worker builds the prompt, completes it, and scores the verdict in
  // place, so aggregate results never depend on completion order.
  std::atomic<std::size_t> next_task{0};
  const std::size_t task_count = n * s;
  auto worker = [&]() {
    for (;;) {
      std::size_t task = next_task.fetch_add(1);
      if (task >= task_count) return;
      const std::size_t inst_idx = task / s;
      const int sample_index = static_cast<int>(task % s);
      const QaInstance& instance = instances[inst_idx];
      SampleSlot& slot = slots[inst_idx][static_cast<std::size_t>(sample_index)];
      try {
        const int demo_index = config.single_prompt_mode ? 0 : sample_index;
        auto demos =
            sample_demos(instance.id, instances, config.seed, demo_index, config.n_shots);
        std::string prompt = build_probe_prompt(instance, demos);

        CompletionParams params;
        params.temperature = config.temperature;
        params.max_tokens = config.max_tokens;
        params.stop = {"\nQuestion:"};
        params.seed = sample_index;
        std::string text = client.complete(prompt, params);

        slot.response.instance_id = instance.id;
        slot.response.sample_index = sample_index;
        slot.response.response_text = text;
        for (const auto& demo : demos) slot.response.demo_ids.push_back(demo.id);
        slot.response.temperature = config.temperature;
        slot.verdict = matcher.match(instance, first_line(text));
        slot.ok = true;
      } catch (const std::exception& e) {
        slot.error = e.what();
      }
    }
  };

  const std::size_t pool_size =
      std::min<std::size_t>(static_cast<std::size_t>(config.concurrency),
                            std::max<std::size_t>(task_count, 1));
  std::vector<std::thread> workers;
  workers.reserve(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) workers.emplace_back(worker);
  for (auto& w : workers) w.join();

  EstimateResult result;
  for (std::size_t i = 0; i < n; ++i) {
    bool complete = true;
    for (std::size_t k = 0; k < slots[i].size(); ++k) {
      if (!slots[i][k].ok) {
        complete = false;
        result.failures.push_back({instances[i].id, static_cast<int>(k), slots[i][k].error});
      }
    }
    if (!complete) continue;

    KnowledgeRecord record;
    record.instance_id = instances[i].id;
    record.matcher = config.matcher.kind;
    record.s = config.s;
    std::int64_t correct = 0;
    for (const auto& slot : slots[i]) {
      record.verdicts.push_back(slot.verdict);
      if (slot.verdict) ++correct;
      result.responses.push_back(slot.response);
    }
    record.score = Rational(correct, config.s);
    result.records.push_back(std::move(record));
  }
  return result;
}

std::vector<ScoreBin> bin_scores(const std::vector<KnowledgeRecord>& records) {
  if (records.empty()) throw ValidationError("bin_scores over no records");
  int s = records.front().s;
  for (const auto& record : records) {
    if (record.s != s) {
      throw ValidationError("bin_scores: mixed s values (" + std::to_string(s) + " and " +
                            std::to_string(record.s) + ")");
    }
  }

  std::vector<ScoreBin> bins(static_cast<std::size_t>(s) + 1);
  for (int k = 0; k <= s; ++k) bins[static_cast<std::size_t>(k)].score = Rational(k, s);
  for (const auto& record : records) {
    std::size_t k =
        static_cast<std::size_t>(record.score.num() * s / record.score.den());
    ++bins[k].count;
  }
  for (auto& bin : bins) {
    bin.percent = 100.0 * static_cast<double>(bin.count) / static_cast<double>(records.size());
  }
  return bins;
}

void save_knowledge_records(const std::string& path, const nlohmann::json& header,
                            const std::vector<KnowledgeRecord>& records) {
  std::vector<nlohmann::json> lines;
  lines.reserve(records.size());
  for (const auto& record : records) lines.push_back(to_json(record));
  write_jsonl(path, header, lines);
}

std::vector<KnowledgeRecord> load_knowledge_records(const std::string& path) {
  std::vector<KnowledgeRecord> records;
  for (const auto& j : read_jsonl_records(path)) {
    records.push_back(knowledge_record_from_json(j));
  }
  return records;
}

void save_sampled_responses(const std::string& path, const nlohmann::json& header,
                            const std::vector<SampledResponse>& responses) {
  std::vector<nlohmann::json> lines;
  lines.reserve(responses.size());
  for (const auto& response : responses) lines.push_back(to_json(response));
  write_jsonl(path, header, lines);
}

std::vector<SampledResponse> load_sampled_responses(const std::string& path) {
  std::vector<SampledResponse> responses;
  for (const auto& j : read_jsonl_records(path)) {
    responses.push_back(sampled_response_from_json(j));
  }
  return responses;
}

}  // namespace kwt
