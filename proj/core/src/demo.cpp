#include "kwt/demo.hpp"

#include <filesystem>
#include <ostream>

#include "kwt/builder.hpp"
#include "kwt/dataset.hpp"
#include "kwt/errors.hpp"
#include "kwt/estimator.hpp"
#include "kwt/evaluator.hpp"
#include "kwt/jsonl.hpp"
#include "kwt/metrics.hpp"
#include "kwt/mockmodel.hpp"
#include "kwt/modelclient.hpp"
#include "kwt/report.hpp"

namespace kwt {

namespace {

const char* kCodewords[] = {"zephyr", "quartz", "maple",   "ember",
                            "cobalt", "saffron", "juniper", "onyx"};

double demo_p_for_index(int i) {
  static const double cycle[] = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  return cycle[i % 6];
}

std::string zero_padded(int value, int width) {
  std::string digits = std::to_string(value);
  if (static_cast<int>(digits.size()) < width) {
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  }
  return digits;
}

}  // namespace

std::vector<QaInstance> make_demo_dataset(int n_instances) {
  if (n_instances < 4) throw ValidationError("demo needs at least 4 instances for 3-shot prompts");
  std::vector<QaInstance> instances;
  instances.reserve(static_cast<std::size_t>(n_instances));
  for (int i = 0; i < n_instances; ++i) {
    const std::string word = kCodewords[i % (sizeof(kCodewords) / sizeof(kCodewords[0]))];
    QaInstance inst;
    inst.id = "demo-" + zero_padded(i + 1, 3);
    inst.question = "What is the codeword stored in vault " + std::to_string(i + 1) + "?";
    inst.gold_response = word + "-" + std::to_string(i + 1);
    inst.knowledge = "Vault " + std::to_string(i + 1) + " stores the codeword " +
                     inst.gold_response + ".";
    inst.dataset_tag = "demo";
    instances.push_back(std::move(inst));
  }
  return instances;
}

int run_demo(const DemoOptions& options, std::ostream& log) {
  if (options.out_dir.empty()) throw ValidationError("demo requires an output directory");
  std::filesystem::create_directories(options.out_dir);
  auto path = [&](const std::string& name) {
    return (std::filesystem::path(options.out_dir) / name).string();
  };
  int files_written = 0;

  auto instances = make_demo_dataset(options.n_instances);
  {
    nlohmann::json config{{"command", "demo"},
                          {"stage", "dataset"},
                          {"n_instances", options.n_instances}};
    std::vector<nlohmann::json> lines;
    for (const auto& inst : instances) lines.push_back(to_json(inst));
    write_jsonl(path("dataset.jsonl"), make_header(options.seed, config), lines);
    ++files_written;
  }
  log << "demo: wrote dataset.jsonl (" << instances.size() << " instances)\n";

  // Stage 1: estimation against the served mock, whose per-instance
  // correctness probability cycles through the six score values.
  MockSpec estimation_spec;
  estimation_spec.seed = options.seed;
  for (int i = 0; i < options.n_instances; ++i) {
    estimation_spec.per_instance_p[instances[static_cast<std::size_t>(i)].id] =
        demo_p_for_index(i);
  }

  EstimationConfig est_config;
  est_config.s = options.s;
  est_config.seed = options.seed;
  est_config.concurrency = options.concurrency;
  est_config.matcher.kind = MatcherKind::em;

  EstimateResult estimated;
  {
    MockServer server(estimation_spec, instances);
    server.start();
    log << "demo: estimation mock listening on " << server.base_url() << "\n";

    EndpointConfig endpoint;
    endpoint.base_url = server.base_url();
    endpoint.model_name = "kwt-mock";
    endpoint.concurrency = options.concurrency;
    endpoint.backoff_base_seconds = 0.05;
    HttpCompletionClient client(endpoint);
    estimated = estimate(instances, est_config, client);
    server.stop();
  }
  if (!estimated.failures.empty()) {
    throw TransportError("demo estimation had " + std::to_string(estimated.failures.size()) +
                         " failed samples");
  }

  nlohmann::json est_header_config{{"command", "estimate"},
                                   {"matcher", to_string(est_config.matcher.kind)},
                                   {"s", est_config.s},
                                   {"n_shots", est_config.n_shots},
                                   {"temperature", est_config.temperature},
                                   {"max_tokens", est_config.max_tokens}};
  save_knowledge_records(path("scores.jsonl"), make_header(options.seed, est_header_config),
                         estimated.records);
  ++files_written;
  save_sampled_responses(path("responses.jsonl"), make_header(options.seed, est_header_config),
                         estimated.responses);
  ++files_written;
  log << "demo: wrote scores.jsonl and responses.jsonl\n";

  // Stage 2: training files in the three modes.
  auto write_training = [&](BaselineMode mode, const std::string& name) {
    BuildConfig config;
    config.baseline_mode = mode;
    config.strategy =
        mode == BaselineMode::kwt ? WeightStrategy::familiarity : WeightStrategy::uniform;
    config.idk_placement =
        mode == BaselineMode::kwt ? IdkPlacement::append : IdkPlacement::none;
    auto examples = build(instances, estimated.records, config);
    nlohmann::json build_config{{"command", "build"},
                                {"mode", to_string(mode)},
                                {"strategy", to_string(config.strategy)},
                                {"idk_threshold_num", config.idk_threshold.num()},
                                {"idk_threshold_den", config.idk_threshold.den()},
                                {"matcher", to_string(est_config.matcher.kind)},
                                {"s", est_config.s}};
    std::vector<nlohmann::json> lines;
    for (const auto& example : examples) lines.push_back(to_json(example));
    write_jsonl(path(name), make_header(options.seed, build_config), lines);
    ++files_written;
    log << "demo: wrote " << name << " (" << examples.size() << " examples)\n";
  };
  write_training(BaselineMode::kwt, "train_kwt.jsonl");
  write_training(BaselineMode::ft_top, "train_ft_top.jsonl");
  write_training(BaselineMode::r_tuning, "train_r_tuning.jsonl");

  // Stage 3: evaluation against a mock whose correctness tracks the drawn
  // score and whose abstention probability is 1 - score, the qualitative
  // score-vs-abstention shape the report's idk_vs_score section shows.
  MockSpec eval_spec;
  eval_spec.seed = options.seed + 1;
  for (const auto& record : estimated.records) {
    double score = record.score.to_double();
    eval_spec.per_instance_p[record.instance_id] = score;
    eval_spec.per_instance_idk_p[record.instance_id] = 1.0 - score;
  }

  EvalConfig eval_config;
  eval_config.seed = options.seed;
  eval_config.concurrency = options.concurrency;
  eval_config.matcher.kind = MatcherKind::em;

  EvalResult evaluated;
  {
    MockServer server(eval_spec, instances);
    server.start();
    log << "demo: evaluation mock listening on " << server.base_url() << "\n";

    EndpointConfig endpoint;
    endpoint.base_url = server.base_url();
    endpoint.model_name = "kwt-mock";
    endpoint.concurrency = options.concurrency;
    endpoint.backoff_base_seconds = 0.05;
    HttpCompletionClient client(endpoint);
    evaluated = evaluate(instances, eval_config, client);
    server.stop();
  }
  if (!evaluated.failures.empty()) {
    throw TransportError("demo evaluation had " + std::to_string(evaluated.failures.size()) +
                         " failed instances");
  }

  nlohmann::json eval_header_config{{"command", "evaluate"},
                                    {"matcher", to_string(eval_config.matcher.kind)},
                                    {"idk_convention", to_string(eval_config.idk_convention)},
                                    {"temperature", eval_config.temperature}};
  save_outcomes(path("outcomes.jsonl"), make_header(options.seed, eval_header_config),
                evaluated.outcomes);
  ++files_written;

  nlohmann::json report;
  report["header"] = make_header(options.seed, eval_header_config);
  auto body = metrics_report_json(evaluated.counts, std::nullopt,
                                  idk_vs_score_report(evaluated.outcomes, estimated.records),
                                  MetricsOptions{});
  report.update(body);
  write_json_file(path("report.json"), report);
  ++files_written;
  log << "demo: wrote outcomes.jsonl and report.json\n";

  return files_written;
}

}  // namespace kwt
