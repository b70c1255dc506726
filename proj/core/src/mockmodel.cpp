#include "kwt/mockmodel.hpp"

#include <atomic>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "kwt/errors.hpp"
#include "kwt/jsonl.hpp"
#include "kwt/prompt.hpp"
#include "kwt/rng.hpp"
#include "kwt/text_norm.hpp"
#include "kwt/version.hpp"

#include <fstream>

namespace kwt {

namespace {

void check_probability(double p, const std::string& what) {
  if (p < 0.0 || p > 1.0) {
    throw ValidationError(what + " must lie in [0,1], got " + std::to_string(p));
  }
}

std::string tagged_distractor(const QaInstance& instance, int sample_index,
                              const MockSpec& spec) {
  RngKey key(spec.seed);
  key.part(instance.id).part(static_cast<std::uint64_t>(sample_index)).part("tag");
  return "UNKNOWN_" + short_hex_tag(key.value());
}

std::string shuffled_distractor(const QaInstance& instance, int sample_index,
                                const MockSpec& spec) {
  std::vector<std::string> tokens;
  std::istringstream in(instance.gold_response);
  std::string token;
  while (in >> token) tokens.push_back(token);
  if (tokens.size() < 2) return tagged_distractor(instance, sample_index, spec);

  RngKey key(spec.seed);
  key.part(instance.id).part(static_cast<std::uint64_t>(sample_index)).part("shuffle");
  SplitMix64 rng(key);
  for (std::size_t i = tokens.size() - 1; i > 0; --i) {
    std::swap(tokens[i], tokens[rng.next_below(i + 1)]);
  }
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  if (out == instance.gold_response) return tagged_distractor(instance, sample_index, spec);
  return out;
}

}  // namespace

double MockSpec::p_for(const std::string& instance_id) const {
  auto it = per_instance_p.find(instance_id);
  return it != per_instance_p.end() ? it->second : p;
}

double MockSpec::idk_p_for(const std::string& instance_id) const {
  auto it = per_instance_idk_p.find(instance_id);
  return it != per_instance_idk_p.end() ? it->second : idk_p;
}

void MockSpec::validate() const {
  check_probability(p, "mock p");
  check_probability(idk_p, "mock idk_p");
  for (const auto& [id, v] : per_instance_p) check_probability(v, "mock p for '" + id + "'");
  for (const auto& [id, v] : per_instance_idk_p) {
    check_probability(v, "mock idk_p for '" + id + "'");
  }
}

nlohmann::json MockSpec::to_json() const {
  nlohmann::json j;
  j["p"] = p;
  j["idk_p"] = idk_p;
  if (!per_instance_p.empty()) j["per_instance_p"] = per_instance_p;
  if (!per_instance_idk_p.empty()) j["per_instance_idk_p"] = per_instance_idk_p;
  j["distractor_mode"] =
      distractor_mode == DistractorMode::tagged_string ? "tagged_string" : "shuffled_gold";
  j["seed"] = seed;
  return j;
}

MockSpec MockSpec::from_json(const nlohmann::json& j) {
  const std::string ctx = "MockSpec";
  MockSpec spec;
  if (j.contains("p")) spec.p = j["p"].get<double>();
  if (j.contains("idk_p")) spec.idk_p = j["idk_p"].get<double>();
  if (j.contains("per_instance_p")) {
    spec.per_instance_p = j["per_instance_p"].get<std::map<std::string, double>>();
  }
  if (j.contains("per_instance_idk_p")) {
    spec.per_instance_idk_p = j["per_instance_idk_p"].get<std::map<std::string, double>>();
  }
  if (j.contains("distractor_mode")) {
    std::string mode = j["distractor_mode"].get<std::string>();
    if (mode == "tagged_string") {
      spec.distractor_mode = DistractorMode::tagged_string;
    } else if (mode == "shuffled_gold") {
      spec.distractor_mode = DistractorMode::shuffled_gold;
    } else {
      throw ValidationError(ctx + ": unknown distractor_mode '" + mode + "'");
    }
  }
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  spec.validate();
  return spec;
}

MockSpec MockSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path + " for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return from_json(j);
}

std::string mock_answer(const QaInstance& instance, int sample_index, const MockSpec& spec) {
  RngKey correctness_key(spec.seed);
  correctness_key.part(instance.id).part(static_cast<std::uint64_t>(sample_index));
  SplitMix64 correctness_rng(correctness_key);
  bool correct = correctness_rng.next_double() < spec.p_for(instance.id);

  std::string answer;
  if (correct) {
    answer = instance.gold_response;
  } else if (spec.distractor_mode == MockSpec::DistractorMode::tagged_string) {
    answer = tagged_distractor(instance, sample_index, spec);
  } else {
    answer = shuffled_distractor(instance, sample_index, spec);
  }

  double idk_p = spec.idk_p_for(instance.id);
  if (idk_p > 0.0) {
    RngKey idk_key(spec.seed);
    idk_key.part(instance.id).part(static_cast<std::uint64_t>(sample_index)).part("idk");
    SplitMix64 idk_rng(idk_key);
    if (idk_rng.next_double() < idk_p) answer += std::string(" ") + kIdkToken;
  }
  return answer;
}

MockResponder::MockResponder(MockSpec spec, std::vector<QaInstance> dataset)
    : spec_(std::move(spec)), dataset_(std::move(dataset)) {
  spec_.validate();
  for (std::size_t i = 0; i < dataset_.size(); ++i) {
    if (!by_question_.emplace(dataset_[i].question, i).second) {
      throw ValidationError("mock dataset has duplicate question text: '" +
                            dataset_[i].question + "'");
    }
  }
}

std::string MockResponder::respond(const std::string& prompt,
                                   const CompletionParams& params) const {
  if (auto judge = parse_judge_prompt(prompt)) {
    return normalize(judge->answer1) == normalize(judge->answer2) ? "yes" : "no";
  }

  auto question = extract_final_question(prompt);
  if (!question.has_value()) {
    throw RequestError("prompt has no final question block", 400, prompt.substr(0, 120));
  }
  auto it = by_question_.find(*question);
  if (it == by_question_.end()) {
    throw RequestError("no dataset instance matches question: '" + *question + "'", 404);
  }
  return mock_answer(dataset_[it->second], params.seed.value_or(0), spec_);
}

struct MockServer::Impl {
  Impl(MockSpec spec, std::vector<QaInstance> dataset)
      : responder(std::move(spec), std::move(dataset)) {}

  MockResponder responder;
  httplib::Server server;
  std::thread thread;
};

MockServer::MockServer(MockSpec spec, std::vector<QaInstance> dataset)
    : impl_(std::make_unique<Impl>(std::move(spec), std::move(dataset))) {
  auto& server = impl_->server;
  auto& responder = impl_->responder;

  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });

  server.Post("/v1/chat/completions", [&responder](const httplib::Request& req,
                                                   httplib::Response& res) {
    auto fail = [&res](int status, const std::string& type, const std::string& message) {
      nlohmann::json error;
      error["error"] = {{"message", message}, {"type", type}};
      res.status = status;
      res.set_content(error.dump(), "application/json");
    };

    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
      fail(400, "invalid_request_error", std::string("request body is not valid JSON: ") +
                                             e.what());
      return;
    }

    std::string prompt;
    CompletionParams params;
    std::string model = "kwt-mock";
    try {
      if (body.contains("model")) model = body["model"].get<std::string>();
      const auto& messages = body.at("messages");
      if (!messages.is_array() || messages.empty()) {
        fail(400, "invalid_request_error", "messages must be a non-empty array");
        return;
      }
      prompt = messages.back().at("content").get<std::string>();
      if (body.contains("temperature")) params.temperature = body["temperature"].get<double>();
      if (body.contains("max_tokens")) params.max_tokens = body["max_tokens"].get<int>();
      if (body.contains("seed")) params.seed = body["seed"].get<int>();
      if (body.contains("stop")) params.stop = body["stop"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      fail(400, "invalid_request_error", std::string("malformed request: ") + e.what());
      return;
    }

    std::string text;
    try {
      text = responder.respond(prompt, params);
    } catch (const RequestError& e) {
      fail(e.status(), e.status() == 404 ? "not_found" : "invalid_request_error", e.what());
      return;
    }

    nlohmann::json reply;
    reply["id"] = "mock-completion";
    reply["object"] = "chat.completion";
    reply["model"] = model;
    reply["choices"] = nlohmann::json::array({
        nlohmann::json{{"index", 0},
                       {"message", {{"role", "assistant"}, {"content", text}}},
                       {"finish_reason", "stop"}},
    });
    res.set_content(reply.dump(), "application/json");
  });
}

MockServer::~MockServer() { stop(); }

int MockServer::start(const std::string& host, int port) {
  auto& server = impl_->server;
  if (port == 0) {
    port_ = server.bind_to_any_port(host);
    if (port_ < 0) throw TransportError("mock server failed to bind on " + host);
  } else {
    if (!server.bind_to_port(host, port)) {
      throw TransportError("mock server failed to bind " + host + ":" + std::to_string(port));
    }
    port_ = port;
  }
  base_url_ = "http://" + host + ":" + std::to_string(port_);

  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  server.wait_until_ready();
  return port_;
}

void MockServer::stop() {
  if (!impl_) return;
  if (impl_->server.is_running()) impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void MockServer::wait() {
  if (impl_ && impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace kwt
