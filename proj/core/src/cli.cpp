#include "kwt/cli.hpp"

#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "kwt/builder.hpp"
#include "kwt/dataset.hpp"
#include "kwt/demo.hpp"
#include "kwt/errors.hpp"
#include "kwt/estimator.hpp"
#include "kwt/evaluator.hpp"
#include "kwt/jsonl.hpp"
#include "kwt/klanalysis.hpp"
#include "kwt/matching.hpp"
#include "kwt/metrics.hpp"
#include "kwt/mockmodel.hpp"
#include "kwt/modelclient.hpp"
#include "kwt/prompt.hpp"
#include "kwt/report.hpp"
#include "kwt/text_norm.hpp"
#include "kwt/version.hpp"

namespace kwt {

namespace {

// Endpoint-related flags shared by the network-facing subcommands.
struct EndpointFlags {
  std::string url;
  std::string model = "default";
  std::string auth_env;
  double timeout = 30.0;
  int retries = 3;
  double backoff = 0.5;
  int concurrency = 4;
  std::string cache_path;

  EndpointConfig to_config() const {
    EndpointConfig config;
    config.base_url = url;
    config.model_name = model;
    config.auth_token_env = auth_env;
    config.timeout_seconds = timeout;
    config.max_retries = retries;
    config.backoff_base_seconds = backoff;
    config.concurrency = concurrency;
    return config;
  }
};

void add_endpoint_flags(CLI::App& cmd, EndpointFlags& flags, bool required) {
  auto* url = cmd.add_option("--endpoint", flags.url, "Model endpoint base URL");
  if (required) url->required();
  cmd.add_option("--model", flags.model, "Model name sent with each request");
  cmd.add_option("--auth-env", flags.auth_env,
                 "Environment variable holding the bearer token");
  cmd.add_option("--timeout", flags.timeout, "Request timeout in seconds");
  cmd.add_option("--retries", flags.retries, "Retry budget for transport/5xx/429 failures");
  cmd.add_option("--backoff", flags.backoff, "Base backoff delay in seconds");
  cmd.add_option("--concurrency", flags.concurrency, "Maximum in-flight requests");
  cmd.add_option("--cache", flags.cache_path,
                 "Replayable response cache file (hits skip the network)");
}

std::shared_ptr<CompletionClient> make_client(const EndpointFlags& flags) {
  auto http = std::make_shared<HttpCompletionClient>(flags.to_config());
  if (flags.cache_path.empty()) return http;
  auto cache = std::make_shared<ResponseCache>(flags.cache_path);
  return std::make_shared<CachedClient>(http, cache, flags.to_config());
}

// Matcher flags shared by estimate/evaluate/agreement.
struct MatcherFlags {
  std::string kind = "em";
  double rouge_threshold = -1.0;
  bool rouge_exclusive = false;
  EndpointFlags judge;
  bool judge_with_knowledge = false;

  MatcherConfig to_config() const {
    MatcherConfig config;
    config.kind = matcher_kind_from_string(kind);
    if (rouge_threshold >= 0.0) config.rouge_threshold = rouge_threshold;
    config.rouge_threshold_exclusive = rouge_exclusive;
    if (config.kind == MatcherKind::llm_judge) {
      if (judge.url.empty()) {
        throw ValidationError("llm_judge matcher requires --judge-endpoint");
      }
      config.judge_client = make_client(judge);
      config.include_knowledge = judge_with_knowledge;
    }
    return config;
  }

  nlohmann::json fingerprint() const {
    nlohmann::json j{{"kind", kind}};
    if (kind == "rouge_l") {
      if (rouge_threshold >= 0.0) {
        j["rouge_threshold"] = rouge_threshold;
      } else {
        j["rouge_threshold"] = "per-dataset default";
      }
      j["inclusive"] = !rouge_exclusive;
    }
    if (kind == "llm_judge") j["judge_with_knowledge"] = judge_with_knowledge;
    return j;
  }
};

void add_matcher_flags(CLI::App& cmd, MatcherFlags& flags) {
  cmd.add_option("--matcher", flags.kind, "Correctness function: em, rouge_l, llm_judge")
      ->check(CLI::IsMember({"em", "rouge_l", "llm_judge"}));
  cmd.add_option("--rouge-threshold", flags.rouge_threshold,
                 "ROUGE-L F1 threshold; omitted means the per-dataset default");
  cmd.add_flag("--rouge-exclusive", flags.rouge_exclusive,
               "Use strict > threshold comparison instead of >=");
  cmd.add_option("--judge-endpoint", flags.judge.url, "Judge endpoint base URL");
  cmd.add_option("--judge-model", flags.judge.model, "Judge model name");
  cmd.add_option("--judge-auth-env", flags.judge.auth_env,
                 "Environment variable holding the judge bearer token");
  cmd.add_option("--judge-cache", flags.judge.cache_path, "Judge response cache file");
  cmd.add_flag("--judge-with-knowledge", flags.judge_with_knowledge,
               "Pass the knowledge paragraph to the judge");
}

// Writes a JSON document to --out, or pretty-prints it to stdout.
void emit_json(const std::string& out_path, const nlohmann::json& j) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json_file(out_path, j);
  }
}

std::string derive_responses_path(const std::string& scores_path) {
  const std::string suffix = ".jsonl";
  if (scores_path.size() > suffix.size() &&
      scores_path.compare(scores_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return scores_path.substr(0, scores_path.size() - suffix.size()) + ".responses.jsonl";
  }
  return scores_path + ".responses.jsonl";
}

Rational parse_threshold(const std::string& text) {
  Rational threshold = Rational::from_decimal(text);
  if (threshold < Rational(0, 1) || threshold >= Rational(1, 1)) {
    throw ValidationError("--idk-threshold must lie in [0,1), got " + text);
  }
  return threshold;
}

struct EstimateOpts {
  std::string dataset, out, responses_out;
  MatcherFlags matcher;
  EndpointFlags endpoint;
  int s = 5, n_shots = 3, max_tokens = 64;
  double temperature = 0.7;
  std::uint64_t seed = 0;
  bool single_prompt = false;
};

void setup_estimate(CLI::App& app) {
  auto* cmd = app.add_subcommand("estimate", "Estimate per-instance knowledge scores");
  auto opts = std::make_shared<EstimateOpts>();
  cmd->add_option("--dataset", opts->dataset, "Dataset file (one QA record per line)")
      ->required();
  cmd->add_option("--out", opts->out, "Scores output file")->required();
  cmd->add_option("--responses-out", opts->responses_out,
                  "Raw sampled-responses output file (default: <out>.responses.jsonl)");
  cmd->add_option("--s", opts->s, "Samples per instance");
  cmd->add_option("--n-shots", opts->n_shots, "Demonstrations per prompt");
  cmd->add_option("--temperature", opts->temperature, "Sampling temperature");
  cmd->add_option("--max-tokens", opts->max_tokens, "Maximum completion tokens");
  cmd->add_option("--seed", opts->seed, "Run seed");
  cmd->add_flag("--single-prompt", opts->single_prompt,
                "Reuse the sample-0 prompt for all samples (ablation)");
  add_matcher_flags(*cmd, opts->matcher);
  add_endpoint_flags(*cmd, opts->endpoint, true);

  cmd->callback([opts]() {
    auto instances = load_dataset(opts->dataset);
    EstimationConfig config;
    config.s = opts->s;
    config.n_shots = opts->n_shots;
    config.temperature = opts->temperature;
    config.seed = opts->seed;
    config.matcher = opts->matcher.to_config();
    config.concurrency = opts->endpoint.concurrency;
    config.max_tokens = opts->max_tokens;
    config.single_prompt_mode = opts->single_prompt;

    auto client = make_client(opts->endpoint);
    std::cerr << "estimate: " << instances.size() << " instances x " << config.s
              << " samples\n";
    auto result = estimate(instances, config, *client);

    nlohmann::json header_config{{"command", "estimate"},
                                 {"matcher", opts->matcher.fingerprint()},
                                 {"s", config.s},
                                 {"n_shots", config.n_shots},
                                 {"temperature", config.temperature},
                                 {"max_tokens", config.max_tokens},
                                 {"single_prompt", config.single_prompt_mode}};
    save_knowledge_records(opts->out, make_header(config.seed, header_config), result.records);
    std::string responses_path = opts->responses_out.empty()
                                     ? derive_responses_path(opts->out)
                                     : opts->responses_out;
    save_sampled_responses(responses_path, make_header(config.seed, header_config),
                           result.responses);

    if (!result.failures.empty()) {
      std::vector<nlohmann::json> lines;
      for (const auto& failure : result.failures) {
        lines.push_back({{"instance_id", failure.instance_id},
                         {"sample_index", failure.sample_index},
                         {"error", failure.error}});
      }
      write_jsonl(opts->out + ".failures.jsonl", make_header(config.seed, header_config), lines);
      std::cerr << "estimate: " << result.failures.size()
                << " failed samples; affected instances excluded (see " << opts->out
                << ".failures.jsonl)\n";
    }
    std::cerr << "estimate: scored " << result.records.size() << " instances\n";
    for (const auto& bin : bin_scores(result.records)) {
      std::cerr << "  score " << bin.score.to_string() << ": " << bin.count << " (" << bin.percent
                << "%)\n";
    }
  });
}

struct BuildOpts {
  std::string scores, dataset, out;
  std::string strategy = "familiarity", idk = "append", mode = "kwt", threshold = "0";
  bool with_knowledge_field = false;
};

void setup_build(CLI::App& app) {
  auto* cmd = app.add_subcommand("build", "Build a weighted training file from scores");
  auto opts = std::make_shared<BuildOpts>();
  cmd->add_option("--scores", opts->scores, "Knowledge-scores file")->required();
  cmd->add_option("--dataset", opts->dataset, "Dataset file")->required();
  cmd->add_option("--out", opts->out, "Training output file")->required();
  cmd->add_option("--strategy", opts->strategy, "familiarity, reverse_familiarity, uniform")
      ->check(CLI::IsMember({"familiarity", "reverse_familiarity", "uniform"}));
  cmd->add_option("--idk", opts->idk, "IDK placement: append, prepend, only, none")
      ->check(CLI::IsMember({"append", "prepend", "only", "none"}));
  cmd->add_option("--mode", opts->mode, "kwt, ft_top, r_tuning, plain_sft")
      ->check(CLI::IsMember({"kwt", "ft_top", "r_tuning", "plain_sft"}));
  cmd->add_option("--idk-threshold", opts->threshold,
                  "Scores <= threshold count as unknown (decimal, default 0)");
  cmd->add_flag("--with-knowledge-field", opts->with_knowledge_field,
                "Prepend the knowledge paragraph to each prompt");

  cmd->callback([opts]() {
    auto instances = load_dataset(opts->dataset);
    auto scores_file = read_jsonl(opts->scores);
    std::vector<KnowledgeRecord> records;
    for (const auto& j : scores_file.records) records.push_back(knowledge_record_from_json(j));

    BuildConfig config;
    config.strategy = weight_strategy_from_string(opts->strategy);
    config.idk_placement = idk_placement_from_string(opts->idk);
    config.baseline_mode = baseline_mode_from_string(opts->mode);
    config.idk_threshold = parse_threshold(opts->threshold);
    config.include_knowledge_field = opts->with_knowledge_field;

    auto examples = build(instances, records, config);

    std::uint64_t seed = 0;
    if (scores_file.header.has_value() && scores_file.header->contains("seed")) {
      seed = (*scores_file.header)["seed"].get<std::uint64_t>();
    }
    nlohmann::json header_config{{"command", "build"},
                                 {"mode", opts->mode},
                                 {"strategy", opts->strategy},
                                 {"idk_placement", opts->idk},
                                 {"idk_threshold_num", config.idk_threshold.num()},
                                 {"idk_threshold_den", config.idk_threshold.den()},
                                 {"include_knowledge_field", config.include_knowledge_field}};
    if (!records.empty()) {
      header_config["matcher"] = to_string(records.front().matcher);
      header_config["s"] = records.front().s;
    }
    std::vector<nlohmann::json> lines;
    for (const auto& example : examples) lines.push_back(to_json(example));
    write_jsonl(opts->out, make_header(seed, header_config), lines);
    std::cerr << "build: wrote " << examples.size() << " examples to " << opts->out << "\n";
  });
}

struct EvaluateOpts {
  std::string test, out, report, scores;
  MatcherFlags matcher;
  EndpointFlags endpoint;
  bool with_knowledge = false, suppress_idk = false;
  std::string idk_convention = "strip";
  double temperature = 0.0;
  int max_tokens = 64;
  std::uint64_t seed = 0;
  double alpha_max = 1.0;
  int grid = 1000;
};

void setup_evaluate(CLI::App& app) {
  auto* cmd = app.add_subcommand("evaluate", "Generate and categorize test-set responses");
  auto opts = std::make_shared<EvaluateOpts>();
  cmd->add_option("--test", opts->test, "Test dataset file")->required();
  cmd->add_option("--out", opts->out, "Outcomes output file")->required();
  cmd->add_option("--report", opts->report, "Metric report output file");
  cmd->add_option("--scores", opts->scores,
                  "Knowledge-scores file for the score-vs-abstention profile");
  cmd->add_flag("--with-knowledge", opts->with_knowledge,
                "Include the knowledge paragraph in test prompts");
  cmd->add_option("--idk-convention", opts->idk_convention,
                  "strip: judge content with <IDK> removed; strict: any <IDK> is incorrect")
      ->check(CLI::IsMember({"strip", "strict", "strip_content", "any_idk_incorrect"}));
  cmd->add_flag("--suppress-idk", opts->suppress_idk,
                "Strip <IDK> from responses before categorizing (deployment mode)");
  cmd->add_option("--temperature", opts->temperature, "Decoding temperature");
  cmd->add_option("--max-tokens", opts->max_tokens, "Maximum completion tokens");
  cmd->add_option("--seed", opts->seed, "Run seed");
  cmd->add_option("--alpha-max", opts->alpha_max, "Curve integration upper bound");
  cmd->add_option("--grid", opts->grid, "Curve integration grid size");
  add_matcher_flags(*cmd, opts->matcher);
  add_endpoint_flags(*cmd, opts->endpoint, true);

  cmd->callback([opts]() {
    auto instances = load_dataset(opts->test);
    EvalConfig config;
    config.matcher = opts->matcher.to_config();
    config.include_knowledge = opts->with_knowledge;
    config.idk_convention = idk_convention_from_string(opts->idk_convention);
    config.suppress_idk = opts->suppress_idk;
    config.seed = opts->seed;
    config.temperature = opts->temperature;
    config.max_tokens = opts->max_tokens;
    config.concurrency = opts->endpoint.concurrency;

    auto client = make_client(opts->endpoint);
    std::cerr << "evaluate: " << instances.size() << " instances\n";
    auto result = evaluate(instances, config, *client);
    if (!result.failures.empty()) {
      std::cerr << "evaluate: " << result.failures.size() << " instances failed and were excluded\n";
    }

    nlohmann::json header_config{{"command", "evaluate"},
                                 {"matcher", opts->matcher.fingerprint()},
                                 {"idk_convention", to_string(config.idk_convention)},
                                 {"with_knowledge", config.include_knowledge},
                                 {"suppress_idk", config.suppress_idk},
                                 {"temperature", config.temperature}};
    save_outcomes(opts->out, make_header(config.seed, header_config), result.outcomes);

    std::optional<std::pair<Counts, Counts>> split;
    if (result.counts_answerable.has_value()) {
      split = std::make_pair(*result.counts_answerable, *result.counts_unanswerable);
    }
    std::vector<ScoreBinFrequency> profile;
    if (!opts->scores.empty()) {
      profile = idk_vs_score_report(result.outcomes, load_knowledge_records(opts->scores));
    }
    MetricsOptions metrics_options;
    metrics_options.alpha_max = opts->alpha_max;
    metrics_options.grid_k = opts->grid;
    nlohmann::json report;
    report["header"] = make_header(config.seed, header_config);
    report.update(metrics_report_json(result.counts, split, profile, metrics_options));
    report["excluded_failures"] = result.failures.size();
    emit_json(opts->report, report);
  });
}

struct MetricsOpts {
  std::string outcomes, split_dataset, scores, out;
  double alpha_max = 1.0;
  int grid = 1000;
  std::uint64_t seed = 0;
};

void setup_metrics(CLI::App& app) {
  auto* cmd = app.add_subcommand("metrics", "Compute the metric suite from an outcomes file");
  auto opts = std::make_shared<MetricsOpts>();
  cmd->add_option("--outcomes", opts->outcomes, "Outcomes file")->required();
  cmd->add_option("--answerable-split", opts->split_dataset,
                  "Dataset file with answerable labels for the split metrics");
  cmd->add_option("--scores", opts->scores,
                  "Knowledge-scores file for the score-vs-abstention profile");
  cmd->add_option("--alpha-max", opts->alpha_max, "Curve integration upper bound");
  cmd->add_option("--grid", opts->grid, "Curve integration grid size");
  cmd->add_option("--seed", opts->seed, "Seed recorded in the report header");
  cmd->add_option("--out", opts->out, "Report output file (default: stdout)");

  cmd->callback([opts]() {
    auto outcomes = load_outcomes(opts->outcomes);
    Counts counts = Counts::from_outcomes(outcomes);

    std::optional<std::pair<Counts, Counts>> split;
    if (!opts->split_dataset.empty()) {
      split = answerability_split(outcomes, load_dataset(opts->split_dataset));
    }
    std::vector<ScoreBinFrequency> profile;
    if (!opts->scores.empty()) {
      profile = idk_vs_score_report(outcomes, load_knowledge_records(opts->scores));
    }

    MetricsOptions metrics_options;
    metrics_options.alpha_max = opts->alpha_max;
    metrics_options.grid_k = opts->grid;
    nlohmann::json header_config{{"command", "metrics"},
                                 {"alpha_max", opts->alpha_max},
                                 {"grid_k", opts->grid}};
    nlohmann::json report;
    report["header"] = make_header(opts->seed, header_config);
    report.update(metrics_report_json(counts, split, profile, metrics_options));
    emit_json(opts->out, report);
  });
}

struct SweepOpts {
  std::string outcomes, out;
  double alpha_max = 1.0;
  int grid = 100;
  std::uint64_t seed = 0;
};

void setup_sweep(CLI::App& app) {
  auto* cmd = app.add_subcommand("sweep", "Dump UA/CA curve points for plotting");
  auto opts = std::make_shared<SweepOpts>();
  cmd->add_option("--outcomes", opts->outcomes, "Outcomes file")->required();
  cmd->add_option("--alpha-max", opts->alpha_max, "Curve upper bound");
  cmd->add_option("--grid", opts->grid, "Number of curve segments");
  cmd->add_option("--seed", opts->seed, "Seed recorded in the header");
  cmd->add_option("--out", opts->out, "Curve output file (default: stdout)");

  cmd->callback([opts]() {
    Counts counts = Counts::from_outcomes(load_outcomes(opts->outcomes));
    auto points = curve_points(counts, opts->alpha_max, opts->grid);
    nlohmann::json header_config{{"command", "sweep"},
                                 {"alpha_max", opts->alpha_max},
                                 {"grid_k", opts->grid}};
    std::vector<nlohmann::json> lines;
    for (const auto& point : points) {
      lines.push_back(
          {{"alpha", point.alpha}, {"ua_acc", point.ua_acc}, {"ca_acc", point.ca_acc}});
    }
    if (opts->out.empty()) {
      nlohmann::json wrapper;
      wrapper["_header"] = make_header(opts->seed, header_config);
      std::cout << wrapper.dump() << "\n";
      for (const auto& line : lines) std::cout << line.dump() << "\n";
    } else {
      write_jsonl(opts->out, make_header(opts->seed, header_config), lines);
    }
  });
}

struct KlOpts {
  std::string base, trained, out;
  std::uint64_t seed = 0;
};

void setup_kl(CLI::App& app) {
  auto* cmd = app.add_subcommand("kl", "Token-level KL divergence between two logprob dumps");
  auto opts = std::make_shared<KlOpts>();
  cmd->add_option("--base", opts->base, "Base-model dump file")->required();
  cmd->add_option("--trained", opts->trained, "Trained-model dump file")->required();
  cmd->add_option("--seed", opts->seed, "Seed recorded in the header");
  cmd->add_option("--out", opts->out, "Report output file (default: stdout)");

  cmd->callback([opts]() {
    auto frames = align_dumps(load_dist_dump(opts->base), load_dist_dump(opts->trained));
    auto report = kl_report(frames);

    nlohmann::json header_config{{"command", "kl"}};
    nlohmann::json j;
    j["header"] = make_header(opts->seed, header_config);
    j["unit"] = "nats";
    j["approximation"] = "tail mass outside the shared explicit support is one lumped bucket";
    j["mean_kl_nats"] = report.mean_nats;
    nlohmann::json per_instance = nlohmann::json::array();
    for (const auto& [id, kl] : report.per_instance) {
      per_instance.push_back({{"instance_id", id}, {"kl_nats", kl}});
    }
    j["per_instance"] = std::move(per_instance);
    emit_json(opts->out, j);
  });
}

struct IdkProfileOpts {
  std::string dump, out;
  std::string idk_token = kIdkToken;
  int bins = 20;
  std::uint64_t seed = 0;
};

void setup_idk_profile(CLI::App& app) {
  auto* cmd = app.add_subcommand("idk-profile",
                                 "Positional abstention-token probability profile");
  auto opts = std::make_shared<IdkProfileOpts>();
  cmd->add_option("--dump", opts->dump, "Logprob dump file")->required();
  cmd->add_option("--idk-token", opts->idk_token, "Token to profile");
  cmd->add_option("--bins", opts->bins, "Number of relative-position bins");
  cmd->add_option("--seed", opts->seed, "Seed recorded in the header");
  cmd->add_option("--out", opts->out, "Profile output file (default: stdout)");

  cmd->callback([opts]() {
    auto profile = idk_position_profile(load_dist_dump(opts->dump), opts->idk_token, opts->bins);
    nlohmann::json header_config{{"command", "idk-profile"},
                                 {"idk_token", opts->idk_token},
                                 {"bins", opts->bins}};
    nlohmann::json j;
    j["header"] = make_header(opts->seed, header_config);
    nlohmann::json bins = nlohmann::json::array();
    for (const auto& bin : profile) {
      bins.push_back({{"low", bin.low},
                      {"high", bin.high},
                      {"positions", bin.positions},
                      {"mean_probability", bin.mean_probability}});
    }
    j["bins"] = std::move(bins);
    emit_json(opts->out, j);
  });
}

struct AgreementOpts {
  std::string responses, dataset, labels, out, sweep_grid;
  MatcherFlags matcher;
  std::uint64_t seed = 0;
};

void setup_agreement(CLI::App& app) {
  auto* cmd = app.add_subcommand("agreement",
                                 "Agreement of a matcher with human correctness labels");
  auto opts = std::make_shared<AgreementOpts>();
  cmd->add_option("--responses", opts->responses, "Sampled-responses file")->required();
  cmd->add_option("--dataset", opts->dataset, "Dataset file with gold answers")->required();
  cmd->add_option("--labels", opts->labels, "Human-label file")->required();
  cmd->add_option("--sweep-grid", opts->sweep_grid,
                  "Comma-separated ROUGE thresholds to sweep (rouge_l only)");
  cmd->add_option("--seed", opts->seed, "Seed recorded in the header");
  cmd->add_option("--out", opts->out, "Report output file (default: stdout)");
  add_matcher_flags(*cmd, opts->matcher);

  cmd->callback([opts]() {
    auto instances = load_dataset(opts->dataset);
    auto responses = load_sampled_responses(opts->responses);
    auto labels = load_human_labels(opts->labels);

    std::map<std::string, const QaInstance*> by_id;
    for (const auto& instance : instances) by_id[instance.id] = &instance;

    Matcher matcher(opts->matcher.to_config());
    std::map<std::pair<std::string, int>, bool> verdicts;
    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<bool> pair_labels;
    std::map<std::pair<std::string, int>, std::string> candidate_by_key;
    for (const auto& response : responses) {
      auto it = by_id.find(response.instance_id);
      if (it == by_id.end()) {
        throw ValidationError("responses reference unknown instance '" + response.instance_id +
                              "'");
      }
      std::string candidate = first_line(response.response_text);
      verdicts[{response.instance_id, response.sample_index}] =
          matcher.match(*it->second, candidate);
      candidate_by_key[{response.instance_id, response.sample_index}] = candidate;
    }
    Agreement result = agreement_against_labels(verdicts, labels);

    nlohmann::json j;
    nlohmann::json header_config{{"command", "agreement"},
                                 {"matcher", opts->matcher.fingerprint()}};
    j["header"] = make_header(opts->seed, header_config);
    j["n"] = labels.size();
    j["accuracy_percent"] = result.accuracy_percent;
    j["f1_percent"] = result.f1_percent;

    if (!opts->sweep_grid.empty()) {
      std::vector<double> grid;
      std::stringstream in(opts->sweep_grid);
      std::string item;
      while (std::getline(in, item, ',')) {
        if (!trim(item).empty()) grid.push_back(std::stod(trim(item)));
      }
      for (const auto& label : labels) {
        auto it = candidate_by_key.find({label.instance_id, label.sample_index});
        if (it == candidate_by_key.end()) {
          throw ValidationError("no response for labeled sample (" + label.instance_id + ", " +
                                std::to_string(label.sample_index) + ")");
        }
        pairs.emplace_back(it->second, by_id.at(label.instance_id)->gold_response);
        pair_labels.push_back(label.correct);
      }
      nlohmann::json sweep = nlohmann::json::array();
      for (const auto& point : rouge_threshold_sweep(pairs, pair_labels, grid)) {
        sweep.push_back({{"threshold", point.threshold},
                         {"accuracy_percent", point.agreement.accuracy_percent},
                         {"f1_percent", point.agreement.f1_percent}});
      }
      j["rouge_threshold_sweep"] = std::move(sweep);
    }
    emit_json(opts->out, j);
  });
}

struct MockServeOpts {
  std::string dataset, spec_path, host = "127.0.0.1", distractor = "tagged_string";
  int port = 8080;
  double p = 1.0, idk_p = 0.0;
  std::uint64_t seed = 0;
};

void setup_mock_serve(CLI::App& app) {
  auto* cmd = app.add_subcommand("mock-serve", "Serve the deterministic mock model over HTTP");
  auto opts = std::make_shared<MockServeOpts>();
  cmd->add_option("--dataset", opts->dataset, "Dataset the mock answers about")->required();
  cmd->add_option("--spec", opts->spec_path, "Mock spec JSON file (overrides the flags below)");
  cmd->add_option("--p", opts->p, "Global correctness probability");
  cmd->add_option("--idk-p", opts->idk_p, "Global abstention probability");
  cmd->add_option("--seed", opts->seed, "Mock draw seed");
  cmd->add_option("--distractor", opts->distractor, "tagged_string or shuffled_gold")
      ->check(CLI::IsMember({"tagged_string", "shuffled_gold"}));
  cmd->add_option("--host", opts->host, "Bind address");
  cmd->add_option("--port", opts->port, "Port (0 picks a free port)");

  cmd->callback([opts]() {
    MockSpec spec;
    if (!opts->spec_path.empty()) {
      spec = MockSpec::load(opts->spec_path);
    } else {
      spec.p = opts->p;
      spec.idk_p = opts->idk_p;
      spec.seed = opts->seed;
      spec.distractor_mode = opts->distractor == "tagged_string"
                                 ? MockSpec::DistractorMode::tagged_string
                                 : MockSpec::DistractorMode::shuffled_gold;
      spec.validate();
    }
    MockServer server(spec, load_dataset(opts->dataset));
    server.start(opts->host, opts->port);
    std::cerr << "mock-serve: listening on " << server.base_url() << "\n";
    server.wait();
  });
}

void setup_demo(CLI::App& app) {
  auto* cmd = app.add_subcommand("demo",
                                 "Hermetic end-to-end pipeline against the served mock model");
  auto opts = std::make_shared<DemoOptions>();
  cmd->add_option("--out", opts->out_dir, "Output directory")->required();
  cmd->add_option("--seed", opts->seed, "Run seed");
  cmd->add_option("--n", opts->n_instances, "Synthetic dataset size");
  cmd->add_option("--concurrency", opts->concurrency, "Request concurrency");

  cmd->callback([opts]() {
    int files = run_demo(*opts, std::cerr);
    std::cerr << "demo: wrote " << files << " files to " << opts->out_dir << "\n";
  });
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{std::string(kToolName) +
               " - knowledge-weighted fine-tuning and abstention evaluation toolkit"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.set_config("--config", "", "Read defaults from a key=value config file");

  setup_estimate(app);
  setup_build(app);
  setup_evaluate(app);
  setup_metrics(app);
  setup_sweep(app);
  setup_kl(app);
  setup_idk_profile(app);
  setup_agreement(app);
  setup_mock_serve(app);
  setup_demo(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace kwt
