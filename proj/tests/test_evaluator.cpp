#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "json.hpp"
#include "kwt/errors.hpp"
#include "kwt/evaluator.hpp"
#include "kwt/mockmodel.hpp"
#include "kwt/version.hpp"
#include "test_util.hpp"

using namespace kwt;

namespace {

QaInstance make_instance(const std::string& id, const std::string& gold) {
  QaInstance inst;
  inst.id = id;
  inst.question = "Question " + id + "?";
  inst.gold_response = gold;
  return inst;
}

// One instance per outcome category, driven by per-instance mock knobs.
struct CategoryFixture {
  std::vector<QaInstance> test_set;
  MockSpec spec;

  CategoryFixture() {
    test_set = {make_instance("abstain_correct", "gold a"),
                make_instance("abstain_wrong", "gold b"), make_instance("plain_correct", "gold c"),
                make_instance("plain_wrong", "gold d")};
    spec.seed = 5;
    spec.per_instance_p = {{"abstain_correct", 1.0},
                           {"abstain_wrong", 0.0},
                           {"plain_correct", 1.0},
                           {"plain_wrong", 0.0}};
    spec.per_instance_idk_p = {{"abstain_correct", 1.0},
                               {"abstain_wrong", 1.0},
                               {"plain_correct", 0.0},
                               {"plain_wrong", 0.0}};
  }
};

class ConstantClient : public CompletionClient {
 public:
  explicit ConstantClient(std::string text) : text_(std::move(text)) {}
  std::string complete(const std::string&, const CompletionParams&) override { return text_; }

 private:
  std::string text_;
};

class RecordingClient : public CompletionClient {
 public:
  explicit RecordingClient(std::string text) : text_(std::move(text)) {}
  std::string complete(const std::string& prompt, const CompletionParams& params) override {
    prompts.push_back(prompt);
    last_params = params;
    return text_;
  }

  std::vector<std::string> prompts;
  CompletionParams last_params;

 private:
  std::string text_;
};

class PoisonedClient : public CompletionClient {
 public:
  PoisonedClient(MockSpec spec, std::vector<QaInstance> dataset, std::string poison_question)
      : inner_(std::move(spec), std::move(dataset)), poison_question_(std::move(poison_question)) {}

  std::string complete(const std::string& prompt, const CompletionParams& params) override {
    if (prompt.find(poison_question_) != std::string::npos) {
      throw TransportError("injected failure");
    }
    return inner_.complete(prompt, params);
  }

 private:
  MockCompletionClient inner_;
  std::string poison_question_;
};

std::string outcomes_fingerprint(const EvalResult& result) {
  std::string out;
  for (const auto& outcome : result.outcomes) out += to_json(outcome).dump() + "\n";
  return out;
}

}  // namespace

TEST_CASE("evaluate rejects empty test sets and bad configs") {
  ConstantClient client("x");
  EvalConfig config;
  CHECK_THROWS_AS(evaluate({}, config, client), ValidationError);

  config.temperature = -1.0;
  CHECK_THROWS_AS(evaluate({make_instance("q", "g")}, config, client), ValidationError);
  config.temperature = 0.0;
  config.concurrency = 0;
  CHECK_THROWS_AS(evaluate({make_instance("q", "g")}, config, client), ValidationError);
}

TEST_CASE("evaluate lands one instance in each category") {
  CategoryFixture fx;
  MockCompletionClient client(fx.spec, fx.test_set);
  EvalConfig config;
  auto result = evaluate(fx.test_set, config, client);

  REQUIRE(result.outcomes.size() == 4);
  CHECK(result.failures.empty());
  CHECK(result.outcomes[0].instance_id == "abstain_correct");
  CHECK(result.outcomes[0].category == Category::A);
  CHECK(result.outcomes[0].has_idk);
  CHECK(result.outcomes[0].content_correct);
  CHECK(result.outcomes[0].response_text == std::string("gold a ") + kIdkToken);

  CHECK(result.outcomes[1].category == Category::B);
  CHECK(result.outcomes[1].has_idk);
  CHECK_FALSE(result.outcomes[1].content_correct);

  CHECK(result.outcomes[2].category == Category::C);
  CHECK_FALSE(result.outcomes[2].has_idk);
  CHECK(result.outcomes[2].response_text == "gold c");

  CHECK(result.outcomes[3].category == Category::D);

  CHECK(result.counts.a == 1);
  CHECK(result.counts.b == 1);
  CHECK(result.counts.c == 1);
  CHECK(result.counts.d == 1);
  CHECK_FALSE(result.counts_answerable.has_value());
  CHECK_FALSE(result.counts_unanswerable.has_value());
}

TEST_CASE("any_idk_incorrect reclassifies only abstained-correct responses") {
  CategoryFixture fx;
  MockCompletionClient client(fx.spec, fx.test_set);
  EvalConfig config;
  config.idk_convention = IdkConvention::any_idk_incorrect;
  auto result = evaluate(fx.test_set, config, client);

  CHECK(result.outcomes[0].category == Category::B);
  CHECK_FALSE(result.outcomes[0].content_correct);
  CHECK(result.outcomes[1].category == Category::B);
  CHECK(result.outcomes[2].category == Category::C);
  CHECK(result.outcomes[3].category == Category::D);
  CHECK(result.counts.a == 0);
  CHECK(result.counts.b == 2);
}

TEST_CASE("suppress_idk strips the marker before categorization") {
  CategoryFixture fx;
  MockCompletionClient client(fx.spec, fx.test_set);
  EvalConfig config;
  config.suppress_idk = true;
  auto result = evaluate(fx.test_set, config, client);

  CHECK(result.outcomes[0].category == Category::C);
  CHECK_FALSE(result.outcomes[0].has_idk);
  CHECK(result.outcomes[0].response_text == "gold a");
  CHECK(result.outcomes[1].category == Category::D);
  CHECK(result.counts.a == 0);
  CHECK(result.counts.b == 0);
  CHECK(result.counts.c == 2);
  CHECK(result.counts.d == 2);
}

TEST_CASE("evaluate truncates responses at the first line") {
  auto inst = make_instance("q", "gold");
  ConstantClient client("gold\nQuestion: runaway?");
  EvalConfig config;
  auto result = evaluate({inst}, config, client);
  CHECK(result.outcomes[0].category == Category::C);
  CHECK(result.outcomes[0].response_text == "gold");
}

TEST_CASE("evaluate sends deterministic decoding params and optional knowledge") {
  auto inst = make_instance("q", "gold");
  inst.knowledge = "K facts.";
  RecordingClient client("gold");
  EvalConfig config;
  config.concurrency = 1;

  evaluate({inst}, config, client);
  REQUIRE(client.prompts.size() == 1);
  CHECK(client.prompts[0] == "Question: Question q?\nAnswer:");
  CHECK(client.last_params.temperature == doctest::Approx(0.0));
  CHECK(client.last_params.seed.has_value());

  config.include_knowledge = true;
  evaluate({inst}, config, client);
  REQUIRE(client.prompts.size() == 2);
  CHECK(client.prompts[1] == "Knowledge: K facts.\nQuestion: Question q?\nAnswer:");
}

TEST_CASE("labeled test sets fill the per-split counts") {
  CategoryFixture fx;
  fx.test_set[0].answerable = false;
  fx.test_set[1].answerable = false;
  fx.test_set[2].answerable = true;
  fx.test_set[3].answerable = true;
  MockCompletionClient client(fx.spec, fx.test_set);
  EvalConfig config;
  auto result = evaluate(fx.test_set, config, client);

  REQUIRE(result.counts_answerable.has_value());
  REQUIRE(result.counts_unanswerable.has_value());
  CHECK(result.counts_answerable->c == 1);
  CHECK(result.counts_answerable->d == 1);
  CHECK(result.counts_answerable->a == 0);
  CHECK(result.counts_unanswerable->a == 1);
  CHECK(result.counts_unanswerable->b == 1);
  CHECK(result.counts_unanswerable->c == 0);
}

TEST_CASE("answerability_split validates labels and ids") {
  std::vector<OutcomeRecord> outcomes(2);
  outcomes[0].instance_id = "x";
  outcomes[0].category = Category::C;
  outcomes[1].instance_id = "y";
  outcomes[1].category = Category::B;

  auto x = make_instance("x", "g");
  auto y = make_instance("y", "g");
  x.answerable = true;
  y.answerable = false;
  auto [ans, unans] = answerability_split(outcomes, {x, y});
  CHECK(ans.c == 1);
  CHECK(ans.total() == 1);
  CHECK(unans.b == 1);

  y.answerable.reset();
  CHECK_THROWS_AS(answerability_split(outcomes, {x, y}), ValidationError);

  y.answerable = false;
  outcomes[1].instance_id = "stranger";
  CHECK_THROWS_AS(answerability_split(outcomes, {x, y}), ValidationError);
}

TEST_CASE("failed instances are reported and excluded from counts") {
  CategoryFixture fx;
  fx.test_set[0].answerable = false;
  fx.test_set[1].answerable = false;
  fx.test_set[2].answerable = true;
  fx.test_set[3].answerable = true;
  PoisonedClient client(fx.spec, fx.test_set, fx.test_set[1].question);
  EvalConfig config;
  auto result = evaluate(fx.test_set, config, client);

  REQUIRE(result.failures.size() == 1);
  CHECK(result.failures[0].instance_id == "abstain_wrong");
  CHECK(result.failures[0].error.find("injected failure") != std::string::npos);
  CHECK(result.outcomes.size() == 3);
  CHECK(result.counts.total() == 3);
  CHECK(result.counts.b == 0);
  REQUIRE(result.counts_unanswerable.has_value());
  CHECK(result.counts_unanswerable->total() == 1);
}

TEST_CASE("evaluate is deterministic and concurrency invariant") {
  std::vector<QaInstance> test_set;
  for (int i = 0; i < 12; ++i) {
    test_set.push_back(make_instance("q" + std::to_string(i), "gold " + std::to_string(i)));
  }
  MockSpec spec;
  spec.seed = 31;
  spec.p = 0.5;
  spec.idk_p = 0.4;

  EvalConfig config;
  config.concurrency = 1;
  MockCompletionClient serial_client(spec, test_set);
  auto serial = evaluate(test_set, config, serial_client);

  config.concurrency = 8;
  MockCompletionClient parallel_client(spec, test_set);
  auto parallel = evaluate(test_set, config, parallel_client);

  CHECK(outcomes_fingerprint(serial) == outcomes_fingerprint(parallel));
  CHECK(serial.counts == parallel.counts);
}

TEST_CASE("outcomes round trip through files") {
  CategoryFixture fx;
  MockCompletionClient client(fx.spec, fx.test_set);
  EvalConfig config;
  auto result = evaluate(fx.test_set, config, client);

  testutil::TempDir dir;
  auto path = dir.file("outcomes.jsonl");
  save_outcomes(path, {{"tool", "kwt"}}, result.outcomes);
  auto loaded = load_outcomes(path);
  REQUIRE(loaded.size() == result.outcomes.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) CHECK(loaded[i] == result.outcomes[i]);
}
