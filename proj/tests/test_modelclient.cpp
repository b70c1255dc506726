#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <cstdlib>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "kwt/errors.hpp"
#include "kwt/modelclient.hpp"
#include "test_util.hpp"

using namespace kwt;
using testutil::TempDir;

namespace {

// Scriptable chat-completions endpoint: serves the queued status codes in
// order, then 200s with an echo payload forever.
class ScriptedServer {
 public:
  explicit ScriptedServer(std::vector<int> status_script = {})
      : script_(std::move(status_script)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      int index = static_cast<int>(hits_.fetch_add(1));
      last_body = req.body;
      if (req.has_header("Authorization")) last_auth = req.get_header_value("Authorization");
      if (index < static_cast<int>(script_.size())) {
        int status = script_[static_cast<std::size_t>(index)];
        if (status == 200) {
          respond_ok(req, res);
        } else if (status == -1) {
          res.status = 200;
          res.set_content("{\"no\":\"choices\"}", "application/json");
        } else {
          res.status = status;
          res.set_content("scripted failure body", "text/plain");
        }
        return;
      }
      respond_ok(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~ScriptedServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int hits() const { return static_cast<int>(hits_.load()); }

  std::string last_body;
  std::string last_auth;

 private:
  static void respond_ok(const httplib::Request& req, httplib::Response& res) {
    auto parsed = nlohmann::json::parse(req.body);
    std::string prompt = parsed["messages"].back()["content"].get<std::string>();
    nlohmann::json reply{
        {"choices",
         nlohmann::json::array({nlohmann::json{{"message", nlohmann::json{{"role", "assistant"},
                                                                          {"content",
                                                                           "echo: " + prompt}}}}})}};
    res.status = 200;
    res.set_content(reply.dump(), "application/json");
  }

  httplib::Server server_;
  std::vector<int> script_;
  std::atomic<int> hits_{0};
  std::thread thread_;
  int port_ = 0;
};

EndpointConfig make_config(const std::string& url) {
  EndpointConfig config;
  config.base_url = url;
  config.model_name = "test-model";
  config.max_retries = 3;
  config.backoff_base_seconds = 0.01;
  return config;
}

}  // namespace

TEST_CASE("config validation") {
  EndpointConfig config = make_config("http://x");
  CHECK_NOTHROW(config.validate());
  config.base_url = "";
  CHECK_THROWS_AS(config.validate(), ValidationError);
  config = make_config("http://x");
  config.max_retries = -1;
  CHECK_THROWS_AS(config.validate(), ValidationError);
  config = make_config("http://x");
  config.concurrency = 0;
  CHECK_THROWS_AS(config.validate(), ValidationError);
}

TEST_CASE("a clean 200 round trip sends the chat payload") {
  ScriptedServer server;
  HttpCompletionClient client(make_config(server.base_url()));
  CompletionParams params;
  params.temperature = 0.7;
  params.max_tokens = 32;
  params.stop = {"\nQuestion:"};
  params.seed = 4;
  CHECK(client.complete("hello", params) == "echo: hello");
  CHECK(server.hits() == 1);

  auto body = nlohmann::json::parse(server.last_body);
  CHECK(body["model"] == "test-model");
  CHECK(body["messages"][0]["role"] == "user");
  CHECK(body["messages"][0]["content"] == "hello");
  CHECK(body["temperature"] == doctest::Approx(0.7));
  CHECK(body["max_tokens"] == 32);
  CHECK(body["stop"][0] == "\nQuestion:");
  CHECK(body["seed"] == 4);
}

TEST_CASE("5xx responses are retried until success") {
  ScriptedServer server({500, 500, 200});
  HttpCompletionClient client(make_config(server.base_url()));
  CHECK(client.complete("p", CompletionParams{}) == "echo: p");
  CHECK(server.hits() == 3);
}

TEST_CASE("429 responses are retried") {
  ScriptedServer server({429, 200});
  HttpCompletionClient client(make_config(server.base_url()));
  CHECK(client.complete("p", CompletionParams{}) == "echo: p");
  CHECK(server.hits() == 2);
}

TEST_CASE("malformed 200 bodies are retried") {
  ScriptedServer server({-1, 200});
  HttpCompletionClient client(make_config(server.base_url()));
  CHECK(client.complete("p", CompletionParams{}) == "echo: p");
  CHECK(server.hits() == 2);
}

TEST_CASE("non-retryable 4xx raises immediately with the body excerpt") {
  ScriptedServer server({401});
  HttpCompletionClient client(make_config(server.base_url()));
  try {
    client.complete("p", CompletionParams{});
    FAIL("expected RequestError");
  } catch (const RequestError& e) {
    CHECK(e.status() == 401);
    CHECK(std::string(e.what()).find("401") != std::string::npos);
    CHECK(e.body_excerpt() == "scripted failure body");
  }
  CHECK(server.hits() == 1);
}

TEST_CASE("exhausted retries raise TransportError with the attempt log") {
  ScriptedServer server({500, 500, 500, 500, 500, 500});
  auto config = make_config(server.base_url());
  config.max_retries = 2;
  HttpCompletionClient client(config);
  try {
    client.complete("p", CompletionParams{});
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(std::string(e.what()).find("3 attempts") != std::string::npos);
    CHECK(e.attempt_log().find("attempt 1") != std::string::npos);
    CHECK(e.attempt_log().find("attempt 3") != std::string::npos);
    CHECK(e.attempt_log().find("status 500") != std::string::npos);
  }
  CHECK(server.hits() == 3);
}

TEST_CASE("an unreachable endpoint fails with a transport error") {
  auto config = make_config("http://127.0.0.1:1");
  config.max_retries = 1;
  HttpCompletionClient client(config);
  CHECK_THROWS_AS(client.complete("p", CompletionParams{}), TransportError);
}

TEST_CASE("auth token is read from the environment at construction") {
  auto config = make_config("http://127.0.0.1:1");
  config.auth_token_env = "KWT_TEST_TOKEN_MISSING";
  ::unsetenv("KWT_TEST_TOKEN_MISSING");
  CHECK_THROWS_AS(HttpCompletionClient{config}, ValidationError);

  ScriptedServer server;
  auto ok = make_config(server.base_url());
  ok.auth_token_env = "KWT_TEST_TOKEN";
  ::setenv("KWT_TEST_TOKEN", "sekret", 1);
  HttpCompletionClient client(ok);
  client.complete("p", CompletionParams{});
  CHECK(server.last_auth == "Bearer sekret");
  ::unsetenv("KWT_TEST_TOKEN");
}

TEST_CASE("concurrent completions all succeed under the in-flight bound") {
  ScriptedServer server;
  auto config = make_config(server.base_url());
  config.concurrency = 3;
  HttpCompletionClient client(config);
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 12; ++i) {
    threads.emplace_back([&client, &ok, i] {
      CompletionParams params;
      if (client.complete("p" + std::to_string(i), params) ==
          "echo: p" + std::to_string(i)) {
        ok.fetch_add(1);
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(ok.load() == 12);
  CHECK(server.hits() == 12);
}

TEST_CASE("params fingerprints are canonical and distinguish settings") {
  CompletionParams a;
  a.temperature = 0.7;
  CompletionParams b;
  b.temperature = 0.7;
  CHECK(params_fingerprint(a) == params_fingerprint(b));
  b.temperature = 0.0;
  CHECK(params_fingerprint(a) != params_fingerprint(b));
  b = a;
  b.seed = 1;
  CHECK(params_fingerprint(a) != params_fingerprint(b));
  b = a;
  b.stop = {"x"};
  CHECK(params_fingerprint(a) != params_fingerprint(b));
}

TEST_CASE("cache keys depend on endpoint identity, prompt, and params") {
  auto config = make_config("http://a");
  CompletionParams params;
  auto key = ResponseCache::cache_key(config, "prompt", params);
  CHECK(key.size() == 32);
  CHECK(key == ResponseCache::cache_key(config, "prompt", params));
  CHECK(key != ResponseCache::cache_key(config, "other", params));

  auto other_model = config;
  other_model.model_name = "different";
  CHECK(key != ResponseCache::cache_key(other_model, "prompt", params));

  auto other_url = make_config("http://b");
  other_url.model_name = config.model_name;
  CHECK(key != ResponseCache::cache_key(other_url, "prompt", params));

  CompletionParams seeded;
  seeded.seed = 9;
  CHECK(key != ResponseCache::cache_key(config, "prompt", seeded));
}

TEST_CASE("cache entries persist and verify the stored prompt") {
  TempDir dir;
  auto path = dir.file("cache.jsonl");
  auto config = make_config("http://a");
  CompletionParams params;
  auto key = ResponseCache::cache_key(config, "prompt", params);
  {
    ResponseCache cache(path);
    CHECK(cache.size() == 0);
    CHECK_FALSE(cache.lookup(key, "prompt").has_value());
    cache.insert(key, "prompt", params_fingerprint(params), "stored answer");
    CHECK(cache.lookup(key, "prompt") == std::string("stored answer"));
    // Same key hash but a different prompt is treated as absent.
    CHECK_FALSE(cache.lookup(key, "collision prompt").has_value());
  }
  ResponseCache reloaded(path);
  CHECK(reloaded.size() == 1);
  CHECK(reloaded.lookup(key, "prompt") == std::string("stored answer"));
}

TEST_CASE("cached client replays a warm cache with zero network traffic") {
  TempDir dir;
  auto path = dir.file("cache.jsonl");
  CompletionParams params;

  EndpointConfig identity;
  int first_run_hits = 0;
  {
    ScriptedServer server;
    identity = make_config(server.base_url());
    auto inner = std::make_shared<HttpCompletionClient>(identity);
    auto cache = std::make_shared<ResponseCache>(path);
    CachedClient client(inner, cache, identity);
    CHECK(client.complete("q1", params) == "echo: q1");
    CHECK(client.complete("q2", params) == "echo: q2");
    CHECK(client.complete("q1", params) == "echo: q1");
    CHECK(client.misses() == 2);
    CHECK(client.hits() == 1);
    first_run_hits = server.hits();
    CHECK(first_run_hits == 2);
  }  // server gone

  // Replay against a dead endpoint: every lookup must hit the cache.
  auto inner = std::make_shared<HttpCompletionClient>(identity);
  auto cache = std::make_shared<ResponseCache>(path);
  CachedClient replay(inner, cache, identity);
  CHECK(replay.complete("q1", params) == "echo: q1");
  CHECK(replay.complete("q2", params) == "echo: q2");
  CHECK(replay.hits() == 2);
  CHECK(replay.misses() == 0);
}

TEST_CASE("different params bypass a stale cache entry") {
  TempDir dir;
  auto path = dir.file("cache.jsonl");
  ScriptedServer server;
  auto identity = make_config(server.base_url());
  auto inner = std::make_shared<HttpCompletionClient>(identity);
  auto cache = std::make_shared<ResponseCache>(path);
  CachedClient client(inner, cache, identity);

  CompletionParams cold;
  cold.temperature = 0.0;
  CompletionParams warm;
  warm.temperature = 0.9;
  client.complete("q", cold);
  client.complete("q", warm);
  CHECK(client.misses() == 2);
  CHECK(cache->size() == 2);
}
