#include "foundry/providers/provider.h"

#include <cmath>
#include <thread>

namespace foundry::providers {

Seconds RetryPolicy::backoff(int retry) const {
  const double mult = std::max(1.0, backoff_multiplier);
  return Seconds(base_backoff.count() * std::pow(mult, std::max(0, retry - 1)));
}

void ProviderRegistry::add(std::shared_ptr<VisionProvider> provider) {
  const std::string id = provider->id();
  providers_[id] = std::move(provider);
}

VisionProvider& ProviderRegistry::get(const std::string& id) const {
  auto it = providers_.find(id);
  if (it == providers_.end()) throw Error(ErrorCode::config_invalid, "unknown provider '" + id + "'");
  return *it->second;
}

std::vector<std::string> ProviderRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : providers_) out.push_back(id);
  return out;
}

ProviderResponse complete_vision(VisionProvider& provider, const VisionPrompt& prompt,
                                 const RetryPolicy& policy, const Sleeper& sleep) {
  const int max_retries = std::max(0, policy.max_retries);
  for (int attempt = 0;; ++attempt) {
    try {
      return provider.complete(prompt);
    } catch (const TransportError& e) {
      if (!policy.retryable.count(e.error_class())) throw;
      if (attempt >= max_retries) {
        throw Error(ErrorCode::transport_exhausted,
                    provider.id() + ": gave up after " + std::to_string(attempt + 1) + " calls: " + e.what());
      }
      const Seconds delay = policy.backoff(attempt + 1);
      if (sleep) {
        sleep(delay);
      } else if (delay.count() > 0) {
        std::this_thread::sleep_for(delay);
      }
    }
  }
}

ProviderResponse complete_vision(const ProviderRegistry& registry, const std::string& provider,
                                 const VisionPrompt& prompt, const RetryPolicy& policy, const Sleeper& sleep) {
  return complete_vision(registry.get(provider), prompt, policy, sleep);
}

const std::string& rotate_provider(std::span<const std::string> pool, Stage /*stage*/, std::size_t index) {
  if (pool.empty()) throw Error(ErrorCode::empty_pool, "provider pool is empty");
  return pool[index % pool.size()];
}

}  // namespace foundry::providers
