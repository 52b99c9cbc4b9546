#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "foundry/agents/prompts.h"
#include "foundry/providers/provider.h"

namespace foundry::eval {

inline constexpr std::array<const char*, 4> kRubricCriteria{"relevance", "trustworthiness", "clarity", "coherence"};

struct RubricScores {
  double relevance = 0.0;
  double trustworthiness = 0.0;
  double clarity = 0.0;
  double coherence = 0.0;
  double overall = 0.0;
  int repetitions = 0;
  std::vector<std::array<int, 4>> per_repetition_raw;

  friend bool operator==(const RubricScores&, const RubricScores&) = default;
};

struct JudgeConfig {
  std::string provider;
  int repetitions = 3;
  double temperature = 0.7;
  int concurrency = 4;
};

struct JudgeContext {
  const providers::ProviderRegistry* registry = nullptr;
  JudgeConfig config;
  agents::PromptLibrary prompts = agents::PromptLibrary::defaults();
  providers::RetryPolicy retry;
  providers::Sleeper sleep;
};

struct JudgeRequest {
  std::string item_id;
  std::string question;
  std::string reference;
  std::string image_path;
  std::string response;
};

/// Four integers in 1..5 from a JSON object keyed by criterion, or from the
/// first four integers in free text. nullopt when neither works.
std::optional<std::array<int, 4>> parse_judgment(const std::string& text);

/// Scores one response `repetitions` times. An unparsable reply is re-asked
/// once; a second failure throws UnparsableJudgment.
RubricScores judge_open_ended(const JudgeRequest& request, const JudgeContext& ctx);

/// Builds criterion means and overall from raw repetitions.
RubricScores aggregate_rubric(std::vector<std::array<int, 4>> raw);

/// Mean of each field over items; repetitions and raw lists are dropped.
RubricScores mean_rubric(const std::vector<RubricScores>& items);

nlohmann::json to_json(const RubricScores& scores);

}  // namespace foundry::eval
