#include "kwt/modelclient.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <semaphore>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "kwt/errors.hpp"
#include "kwt/jsonl.hpp"
#include "kwt/rng.hpp"

#include <fstream>

namespace kwt {

namespace {

std::string body_excerpt(const std::string& body) {
  constexpr std::size_t kMax = 200;
  if (body.size() <= kMax) return body;
  return body.substr(0, kMax) + "...";
}

nlohmann::json chat_request_body(const std::string& model, const std::string& prompt,
                                 const CompletionParams& params) {
  nlohmann::json body;
  body["model"] = model;
  body["messages"] = nlohmann::json::array({
      nlohmann::json{{"role", "user"}, {"content", prompt}},
  });
  body["temperature"] = params.temperature;
  body["max_tokens"] = params.max_tokens;
  if (!params.stop.empty()) body["stop"] = params.stop;
  if (params.seed.has_value()) body["seed"] = *params.seed;
  return body;
}

// Extracts the first choice's text from a chat or legacy completion payload.
std::string extract_completion_text(const std::string& body) {
  nlohmann::json j = nlohmann::json::parse(body);
  const auto& choices = j.at("choices");
  if (!choices.is_array() || choices.empty()) {
    throw ParseError("completion response has no choices");
  }
  const auto& first = choices.at(0);
  if (first.contains("message")) return first.at("message").at("content").get<std::string>();
  return first.at("text").get<std::string>();
}

}  // namespace

void EndpointConfig::validate() const {
  if (base_url.empty()) throw ValidationError("endpoint base_url is empty");
  if (timeout_seconds <= 0.0) throw ValidationError("endpoint timeout must be positive");
  if (max_retries < 0) throw ValidationError("endpoint max_retries must be >= 0");
  if (backoff_base_seconds < 0.0) throw ValidationError("endpoint backoff must be >= 0");
  if (concurrency < 1) throw ValidationError("endpoint concurrency must be >= 1");
}

struct HttpCompletionClient::Impl {
  explicit Impl(const EndpointConfig& config)
      : in_flight(config.concurrency) {}

  std::counting_semaphore<> in_flight;
  std::string auth_token;
};

HttpCompletionClient::HttpCompletionClient(EndpointConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>(config_)) {
  config_.validate();
  if (!config_.auth_token_env.empty()) {
    const char* token = std::getenv(config_.auth_token_env.c_str());
    if (token == nullptr) {
      throw ValidationError("auth environment variable '" + config_.auth_token_env +
                            "' is not set");
    }
    impl_->auth_token = token;
  }
}

HttpCompletionClient::~HttpCompletionClient() = default;

std::string HttpCompletionClient::complete(const std::string& prompt,
                                           const CompletionParams& params) {
  impl_->in_flight.acquire();
  struct Release {
    std::counting_semaphore<>& sem;
    ~Release() { sem.release(); }
  } release{impl_->in_flight};

  const std::string body = chat_request_body(config_.model_name, prompt, params).dump();
  httplib::Headers headers;
  if (!impl_->auth_token.empty()) {
    headers.emplace("Authorization", "Bearer " + impl_->auth_token);
  }

  std::string attempt_log;
  const int attempts = config_.max_retries + 1;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1) {
      double delay = config_.backoff_base_seconds * static_cast<double>(1 << (attempt - 2));
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }

    httplib::Client client(config_.base_url);
    client.set_connection_timeout(std::chrono::duration<double>(config_.timeout_seconds));
    client.set_read_timeout(std::chrono::duration<double>(config_.timeout_seconds));
    client.set_write_timeout(std::chrono::duration<double>(config_.timeout_seconds));

    auto result = client.Post("/v1/chat/completions", headers, body, "application/json");
    if (!attempt_log.empty()) attempt_log += "; ";
    if (!result) {
      attempt_log += "attempt " + std::to_string(attempt) + ": transport error (" +
                     httplib::to_string(result.error()) + ")";
      continue;
    }
    if (result->status == 200) {
      try {
        return extract_completion_text(result->body);
      } catch (const std::exception& e) {
        attempt_log += "attempt " + std::to_string(attempt) + ": malformed response body (" +
                       e.what() + ")";
        continue;
      }
    }
    if (result->status >= 500 || result->status == 429) {
      attempt_log += "attempt " + std::to_string(attempt) + ": status " +
                     std::to_string(result->status);
      continue;
    }
    throw RequestError("completion request rejected with status " +
                           std::to_string(result->status),
                       result->status, body_excerpt(result->body));
  }
  throw TransportError("completion request failed after " + std::to_string(attempts) +
                           " attempts against " + config_.base_url,
                       attempt_log);
}

std::string params_fingerprint(const CompletionParams& params) {
  nlohmann::json j;
  j["temperature"] = params.temperature;
  j["max_tokens"] = params.max_tokens;
  j["stop"] = params.stop;
  if (params.seed.has_value()) j["seed"] = *params.seed;
  return j.dump();
}

std::string ResponseCache::cache_key(const EndpointConfig& endpoint, const std::string& prompt,
                                     const CompletionParams& params) {
  RngKey key(fnv1a64(endpoint.base_url));
  key.part(endpoint.model_name).part(prompt).part(params_fingerprint(params));
  std::uint64_t h1 = key.value();
  std::uint64_t h2 = fnv1a64(prompt, h1 ^ 0x9E3779B97F4A7C15ULL);
  return short_hex_tag(h1 >> 32) + short_hex_tag(h1 & 0xFFFFFFFFULL) +
         short_hex_tag(h2 >> 32) + short_hex_tag(h2 & 0xFFFFFFFFULL);
}

ResponseCache::ResponseCache(std::string path) : path_(std::move(path)) {
  std::ifstream probe(path_);
  if (!probe.good()) return;
  probe.close();
  for (const auto& j : read_jsonl_records(path_)) {
    const std::string ctx = "cache entry";
    const auto& key = require_field(j, "key_hash", ctx);
    const auto& prompt = require_field(j, "prompt", ctx);
    const auto& response = require_field(j, "response", ctx);
    if (!key.is_string() || !prompt.is_string() || !response.is_string()) {
      throw ParseError(path_ + ": cache entry fields must be strings");
    }
    entries_.emplace(key.get<std::string>(),
                     Entry{prompt.get<std::string>(), response.get<std::string>()});
  }
}

std::optional<std::string> ResponseCache::lookup(const std::string& key,
                                                 const std::string& prompt) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto [begin, end] = entries_.equal_range(key);
  for (auto it = begin; it != end; ++it) {
    if (it->second.prompt == prompt) return it->second.response;
  }
  return std::nullopt;
}

void ResponseCache::insert(const std::string& key, const std::string& prompt,
                           const std::string& params_json, const std::string& response) {
  std::lock_guard<std::mutex> lock(mutex_);
  nlohmann::json entry;
  entry["key_hash"] = key;
  entry["prompt"] = prompt;
  entry["params"] = params_json;
  entry["response"] = response;
  entry["timestamp"] = static_cast<std::int64_t>(std::time(nullptr));

  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw ValidationError("cannot open cache file " + path_ + " for append");
  out << entry.dump() << '\n';
  if (!out) throw ValidationError("cache append failed for " + path_);
  entries_.emplace(key, Entry{prompt, response});
}

std::size_t ResponseCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

CachedClient::CachedClient(std::shared_ptr<CompletionClient> inner,
                           std::shared_ptr<ResponseCache> cache, EndpointConfig identity)
    : inner_(std::move(inner)), cache_(std::move(cache)), identity_(std::move(identity)) {
  if (!inner_) throw ValidationError("cached client requires an inner client");
  if (!cache_) throw ValidationError("cached client requires a cache");
}

std::string CachedClient::complete(const std::string& prompt, const CompletionParams& params) {
  const std::string key = ResponseCache::cache_key(identity_, prompt, params);
  if (auto hit = cache_->lookup(key, prompt)) {
    std::lock_guard<std::mutex> lock(stats_mutex_);
    ++hits_;
    return *hit;
  }
  std::string response = inner_->complete(prompt, params);
  cache_->insert(key, prompt, params_fingerprint(params), response);
  {
    std::lock_guard<std::mutex> lock(stats_mutex_);
    ++misses_;
  }
  return response;
}

std::size_t CachedClient::hits() const {
  std::lock_guard<std::mutex> lock(stats_mutex_);
  return hits_;
}

std::size_t CachedClient::misses() const {
  std::lock_guard<std::mutex> lock(stats_mutex_);
  return misses_;
}

}  // namespace kwt
