#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "kwt/completion.hpp"
#include "kwt/types.hpp"

namespace kwt {

// Deterministic mock model used as the test oracle for estimation and
// evaluation. Every draw comes from the toolkit's fixed keyed-generator
// construction, so behavior is identical across processes and platforms.
struct MockSpec {
  // Correctness probability: gold is emitted when the correctness draw for
  // (seed, instance_id, sample_index) lands below it.
  double p = 1.0;
  std::map<std::string, double> per_instance_p;

  // Abstention probability: " <IDK>" is appended when an independent draw
  // keyed (seed, instance_id, sample_index, "idk") lands below it. Zero, the
  // default, reproduces a plain answer-only model.
  double idk_p = 0.0;
  std::map<std::string, double> per_instance_idk_p;

  enum class DistractorMode { tagged_string, shuffled_gold };
  DistractorMode distractor_mode = DistractorMode::tagged_string;
  std::uint64_t seed = 0;

  double p_for(const std::string& instance_id) const;
  double idk_p_for(const std::string& instance_id) const;
  void validate() const;

  nlohmann::json to_json() const;
  static MockSpec from_json(const nlohmann::json& j);
  static MockSpec load(const std::string& path);
};

// The mock's answer for one (instance, sample_index) pair: gold verbatim
// when the correctness draw succeeds, otherwise a distractor guaranteed to
// fail every matcher in tagged_string mode ("UNKNOWN_" plus a stable hex
// tag of the draw key). An abstention draw appends " <IDK>".
std::string mock_answer(const QaInstance& instance, int sample_index, const MockSpec& spec);

// Prompt-level mock shared by the in-process client and the HTTP server.
// Judge prompts are answered by a deterministic stand-in judge (normalized
// exact equality of Answer1/Answer2); any other prompt is matched to a
// dataset instance by the exact question text of its final block, with the
// request's seed field interpreted as the sample index.
class MockResponder {
 public:
  MockResponder(MockSpec spec, std::vector<QaInstance> dataset);

  std::string respond(const std::string& prompt, const CompletionParams& params) const;
  const MockSpec& spec() const { return spec_; }

 private:
  MockSpec spec_;
  std::vector<QaInstance> dataset_;
  std::map<std::string, std::size_t> by_question_;
};

// In-process mock endpoint, for hermetic tests without sockets.
class MockCompletionClient : public CompletionClient {
 public:
  MockCompletionClient(MockSpec spec, std::vector<QaInstance> dataset)
      : responder_(std::move(spec), std::move(dataset)) {}

  std::string complete(const std::string& prompt, const CompletionParams& params) override {
    return responder_.respond(prompt, params);
  }

 private:
  MockResponder responder_;
};

// Mock model served over HTTP with the OpenAI-compatible chat/completions
// shape. Unmatchable questions give a 404-style error payload, malformed
// requests a 400-style one; GET /healthz reports readiness.
class MockServer {
 public:
  MockServer(MockSpec spec, std::vector<QaInstance> dataset);
  ~MockServer();

  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  // Binds and serves on a background thread. port 0 picks a free port.
  // Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();
  // Blocks until the server stops (for foreground serving).
  void wait();

  const std::string& base_url() const { return base_url_; }
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string base_url_;
  int port_ = 0;
};

}  // namespace kwt
