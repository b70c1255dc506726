#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "kwt/completion.hpp"

namespace kwt {

// Connection settings for an OpenAI-compatible chat/completions endpoint.
// The auth token is read from the named environment variable and never
// written to any file.
struct EndpointConfig {
  std::string base_url;
  std::string model_name = "default";
  std::string auth_token_env;
  double timeout_seconds = 30.0;
  int max_retries = 3;
  double backoff_base_seconds = 0.5;
  int concurrency = 4;

  void validate() const;
};

// HTTP client for POST {base_url}/v1/chat/completions. Transport failures,
// 5xx, and 429 are retried with exponential backoff up to max_retries; any
// other 4xx raises RequestError immediately. At most `concurrency` requests
// are in flight at once.
class HttpCompletionClient : public CompletionClient {
 public:
  explicit HttpCompletionClient(EndpointConfig config);
  ~HttpCompletionClient() override;

  std::string complete(const std::string& prompt, const CompletionParams& params) override;
  const EndpointConfig& config() const { return config_; }

 private:
  struct Impl;
  EndpointConfig config_;
  std::unique_ptr<Impl> impl_;
};

// Append-only on-disk transcript of completion responses, replayable across
// runs: a warm cache answers repeats without any network traffic. Entries
// are keyed by a hash of (endpoint identity, model, prompt, decoding
// params); lookups verify the stored prompt so hash collisions cannot serve
// a wrong response.
class ResponseCache {
 public:
  explicit ResponseCache(std::string path);

  static std::string cache_key(const EndpointConfig& endpoint, const std::string& prompt,
                               const CompletionParams& params);

  std::optional<std::string> lookup(const std::string& key, const std::string& prompt) const;
  void insert(const std::string& key, const std::string& prompt,
              const std::string& params_json, const std::string& response);

  const std::string& path() const { return path_; }
  std::size_t size() const;

 private:
  struct Entry {
    std::string prompt;
    std::string response;
  };

  std::string path_;
  mutable std::mutex mutex_;
  std::multimap<std::string, Entry> entries_;
};

// Serializes decoding params canonically for cache keys and cache entries.
std::string params_fingerprint(const CompletionParams& params);

// Wraps a client with a ResponseCache: hits skip the inner client entirely,
// misses are forwarded and recorded.
class CachedClient : public CompletionClient {
 public:
  CachedClient(std::shared_ptr<CompletionClient> inner, std::shared_ptr<ResponseCache> cache,
               EndpointConfig identity);

  std::string complete(const std::string& prompt, const CompletionParams& params) override;
  std::size_t hits() const;
  std::size_t misses() const;

 private:
  std::shared_ptr<CompletionClient> inner_;
  std::shared_ptr<ResponseCache> cache_;
  EndpointConfig identity_;
  mutable std::mutex stats_mutex_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace kwt
