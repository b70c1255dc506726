#pragma once

#include <optional>
#include <string>
#include <vector>

namespace kwt {

// Decoding parameters forwarded with every completion request. seed is an
// opaque pass-through: the HTTP client sends it as the OpenAI "seed" field
// and the mock model interprets it as the sample index of its deterministic
// draw, which is what makes multi-sample estimation replayable.
struct CompletionParams {
  double temperature = 0.0;
  int max_tokens = 256;
  std::vector<std::string> stop;
  std::optional<int> seed;
};

// A text-completion backend. Implementations must be safe to call from
// multiple threads; results depend only on (prompt, params).
class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  virtual std::string complete(const std::string& prompt, const CompletionParams& params) = 0;
};

}  // namespace kwt
