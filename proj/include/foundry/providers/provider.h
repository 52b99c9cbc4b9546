#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "foundry/core/error.h"
#include "foundry/core/types.h"

namespace foundry::providers {

using Seconds = std::chrono::duration<double>;

struct VisionPrompt {
  std::string system_text;
  std::string user_text;
  std::optional<std::string> image_path;
  double temperature = 0.7;
  int max_output_tokens = 1024;
  std::optional<std::string> response_schema_hint;

  // Not sent on the wire. `purpose` names the agent role ("caption",
  // "question", "answer", "validate_caption", "judge", ...); `request_key`
  // identifies the logical request so simulated output does not depend on
  // call interleaving; `context` holds the structured values the user_text
  // was rendered from.
  std::string purpose;
  std::string request_key;
  nlohmann::json context = nlohmann::json::object();
};

struct TokenUsage {
  int input = 0;
  int output = 0;
};

struct ProviderResponse {
  std::string text;
  std::string model;
  Seconds latency{0.0};
  std::optional<TokenUsage> token_usage;
};

struct RetryPolicy {
  int max_retries = 2;
  Seconds base_backoff{0.5};
  double backoff_multiplier = 2.0;
  std::set<TransportErrorClass> retryable{TransportErrorClass::connection, TransportErrorClass::timeout,
                                          TransportErrorClass::server_error,
                                          TransportErrorClass::rate_limited};

  /// Delay before retry number `retry` (1-based). Non-decreasing in `retry`.
  Seconds backoff(int retry) const;
};

/// One vision-language backend. `complete` performs exactly one attempt and
/// throws TransportError / Error on failure. Implementations must be safe to
/// call from several threads.
class VisionProvider {
 public:
  virtual ~VisionProvider() = default;
  virtual const std::string& id() const = 0;
  virtual ProviderResponse complete(const VisionPrompt& prompt) = 0;
};

class ProviderRegistry {
 public:
  void add(std::shared_ptr<VisionProvider> provider);
  VisionProvider& get(const std::string& id) const;
  bool contains(const std::string& id) const { return providers_.count(id) > 0; }
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, std::shared_ptr<VisionProvider>> providers_;
};

using Sleeper = std::function<void(Seconds)>;

/// Calls `provider` until success, retrying retryable transport failures up
/// to policy.max_retries times. Throws TransportExhausted once retries run out;
/// non-retryable errors propagate unchanged.
ProviderResponse complete_vision(VisionProvider& provider, const VisionPrompt& prompt,
                                 const RetryPolicy& policy, const Sleeper& sleep = {});

ProviderResponse complete_vision(const ProviderRegistry& registry, const std::string& provider,
                                 const VisionPrompt& prompt, const RetryPolicy& policy,
                                 const Sleeper& sleep = {});

/// Round-robin backend choice: pool[index mod |pool|]. Throws EmptyPool.
const std::string& rotate_provider(std::span<const std::string> pool, Stage stage, std::size_t index);

}  // namespace foundry::providers
