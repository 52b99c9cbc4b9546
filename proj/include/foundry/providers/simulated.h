#pragma once

#include <deque>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "foundry/core/rng.h"
#include "foundry/providers/provider.h"

namespace foundry::providers {

struct LatencyModel {
  double mean_s = 0.8;
  double sigma = 0.25;  // lognormal shape; 0 gives a constant latency
};

struct StageBehavior {
  double validation_pass_probability = 1.0;
  std::vector<std::string> response_templates;
  double inconsistency_rate = 0.0;
  LatencyModel latency;
};

/// Deterministic stand-in for a vision-language endpoint. Behaviours are
/// keyed by prompt purpose. Scripted responses (per purpose, consumed in
/// call order) and transport faults override the generated output.
struct SimulatedProviderScript {
  std::uint64_t seed = 0;
  std::map<std::string, StageBehavior> stage_behaviors;
  std::map<std::string, std::deque<std::string>> scripted_responses;
  /// Normalized expected answer per question_id; answer validation fails
  /// when the modal answer contradicts it.
  std::map<std::string, std::string> ground_truth;
  int fail_first_calls = 0;
  bool always_fail = false;
  TransportErrorClass failure_class = TransportErrorClass::connection;
};

struct RequestLogEntry {
  std::string purpose;
  std::string request_key;
  double temperature = 0.0;
  int max_output_tokens = 0;
  std::string system_text;
  std::string user_text;
  std::optional<std::string> image_path;
};

class SimulatedProvider final : public VisionProvider {
 public:
  SimulatedProvider(std::string id, SimulatedProviderScript script);

  const std::string& id() const override { return id_; }
  ProviderResponse complete(const VisionPrompt& prompt) override;

  /// Total calls including injected failures; empty purpose counts all.
  std::size_t call_count(const std::string& purpose = {}) const;
  std::vector<RequestLogEntry> request_log() const;

 private:
  std::string generate(const VisionPrompt& prompt, const StageBehavior& behavior, Rng& rng) const;
  const StageBehavior& behavior_for(const std::string& purpose) const;

  std::string id_;
  SimulatedProviderScript script_;
  StageBehavior default_behavior_;

  mutable std::mutex mu_;
  std::map<std::string, std::size_t> calls_by_purpose_;
  std::map<std::string, std::size_t> calls_by_key_;
  std::size_t total_calls_ = 0;
  std::vector<RequestLogEntry> log_;
};

/// Default driving-scene caption templates used when a script supplies none.
const std::vector<std::string>& default_caption_templates();

}  // namespace foundry::providers
