#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "foundry/agents/prompts.h"
#include "foundry/core/types.h"
#include "foundry/providers/provider.h"

namespace foundry::agents {

/// Everything an agent needs to issue provider calls.
struct AgentContext {
  const providers::ProviderRegistry* registry = nullptr;
  PipelineConfig config;
  PromptLibrary prompts = PromptLibrary::defaults();
  providers::RetryPolicy retry;
  providers::Sleeper sleep;  // empty: real sleeps between retries
};

/// Throws ConfigInvalid unless the pool has >= 2 providers, the validator is
/// configured and outside the generation pool, and every id is registered.
void check_pipeline_config(const PipelineConfig& config, const providers::ProviderRegistry& registry);

enum class Mechanism { caption_image_relevance, question_sotif_relevance, answer_correctness };
std::string_view to_string(Mechanism m);

struct Verdict {
  bool pass = false;
  Mechanism mechanism = Mechanism::caption_image_relevance;
  std::string reason;
};

struct ConsistencyReport {
  std::string question_id;
  int trials = 0;
  int affirmative_count = 0;
  bool consistent = true;
  std::string majority_answer;
  std::vector<std::string> answers;  // normalized, one per trial
};

struct QuestionSlot {
  AnswerMode mode = AnswerMode::open;
  std::optional<ClosedType> closed_type;
};

/// Seeded per-image draw: 2 or 3 closed slots (equal odds) at shuffled
/// positions, each closed type uniform over the five categories.
std::vector<QuestionSlot> draw_question_plan(std::uint64_t seed, const std::string& image_id, int attempt);

Caption generate_caption(const ImageRecord& image, const AgentContext& ctx, std::size_t ordinal, int attempt = 1);

std::vector<QaItem> generate_questions(const ImageRecord& image, const Caption& caption,
                                       const std::optional<std::vector<DetectionAnnotation>>& detections,
                                       const AgentContext& ctx, std::size_t ordinal, int attempt = 1);

/// Ten answers: ids 1-5 from providers[0], 6-10 from providers[1], one call
/// per batch. A short batch is topped up from the same provider.
std::vector<Answer> generate_answers(const ImageRecord& image, const QaItem& item, const AgentContext& ctx,
                                     int attempt = 1);

using Artifact = std::variant<Caption, std::vector<QaItem>, QaItem>;

/// Runs the mechanism matching `stage` on the validator provider.
Verdict validate(Stage stage, const Artifact& artifact, const ImageRecord& image, const AgentContext& ctx,
                 int attempt = 1);

/// Asks the same closed question `trials` times and reports agreement.
ConsistencyReport consistency_probe(const QaItem& item, const ImageRecord& image, int trials,
                                    const AgentContext& ctx);

/// Pulls the first JSON object out of model text (tolerates code fences and
/// surrounding prose). Throws SchemaParseFailure.
nlohmann::json extract_json_object(const std::string& text);

}  // namespace foundry::agents
