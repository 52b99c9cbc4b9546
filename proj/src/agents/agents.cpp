#include "foundry/agents/agents.h"

#include <algorithm>
#include <set>

#include "foundry/core/rng.h"
#include "foundry/core/serialize.h"
#include "foundry/core/text.h"

namespace foundry::agents {
namespace {

using nlohmann::json;
using providers::VisionPrompt;

constexpr double kValidationTemperature = 0.0;

const char* const kQuestionSchema =
    R"({"questions": [{"question": str, "answer_mode": "closed"|"open", "closed_type": "uncertainty"|"existence"|"type"|"counting"|"key_object" (closed only), "difficulty": "easy"|"medium"|"hard", "expected_answer_type": "analysis"|"yes_no_multiple_choice"|"recommendation"|"count"|"identification"}]})";
const char* const kAnswerSchema =
    R"({"answers": [{"text": str, "confidence": "yes"|"maybe"|"no", "answer_type": str}]})";
const char* const kVerdictSchema = R"({"pass": bool, "reason": str})";

VisionPrompt make_prompt(const AgentContext& ctx, const std::string& role, json context, const ImageRecord& image,
                         double temperature, std::string request_key) {
  const PromptTemplate& tmpl = ctx.prompts.get(role);
  VisionPrompt p;
  p.system_text = render(tmpl.system, context);
  p.user_text = render(tmpl.user, context);
  if (!image.file_path.empty()) p.image_path = image.file_path;
  p.temperature = temperature;
  p.purpose = role;
  p.request_key = std::move(request_key);
  p.context = std::move(context);
  return p;
}

providers::ProviderResponse call(const AgentContext& ctx, const std::string& provider, const VisionPrompt& p) {
  if (ctx.registry == nullptr) throw Error(ErrorCode::config_invalid, "agent context has no provider registry");
  return providers::complete_vision(*ctx.registry, provider, p, ctx.retry, ctx.sleep);
}

Confidence parse_confidence(const json& v) {
  if (v.is_number()) {
    const double c = v.get<double>();
    return c >= 0.67 ? Confidence::yes : (c >= 0.34 ? Confidence::maybe : Confidence::no);
  }
  if (v.is_string()) {
    if (auto c = parse_enum<Confidence>(to_lower(trim(v.get<std::string>())))) return *c;
    const std::string s = to_lower(v.get<std::string>());
    if (s == "high") return Confidence::yes;
    if (s == "medium") return Confidence::maybe;
    if (s == "low") return Confidence::no;
  }
  throw Error(ErrorCode::schema_parse_failure, "unrecognized confidence " + v.dump());
}

std::string ordinal_key(const ImageRecord& image, const std::string& stage, int attempt) {
  return image.image_id + "/" + stage + "/" + std::to_string(attempt);
}

json detections_json(const std::optional<std::vector<DetectionAnnotation>>& detections) {
  return detections ? json(*detections) : json::array();
}

}  // namespace

std::string_view to_string(Mechanism m) {
  switch (m) {
    case Mechanism::caption_image_relevance: return "caption_image_relevance";
    case Mechanism::question_sotif_relevance: return "question_sotif_relevance";
    case Mechanism::answer_correctness: return "answer_correctness";
  }
  return "?";
}

void check_pipeline_config(const PipelineConfig& config, const providers::ProviderRegistry& registry) {
  if (config.providers.size() < 2)
    throw Error(ErrorCode::config_invalid, "pipeline needs at least two generation providers");
  if (config.validator.empty()) throw Error(ErrorCode::config_invalid, "pipeline needs a validator provider");
  if (std::find(config.providers.begin(), config.providers.end(), config.validator) != config.providers.end())
    throw Error(ErrorCode::config_invalid, "validator '" + config.validator + "' must not be a generation provider");
  for (const auto& id : config.providers)
    if (!registry.contains(id)) throw Error(ErrorCode::config_invalid, "provider '" + id + "' is not configured");
  if (!registry.contains(config.validator))
    throw Error(ErrorCode::config_invalid, "validator '" + config.validator + "' is not configured");
  if (config.parallelism < 1) throw Error(ErrorCode::config_invalid, "parallelism must be >= 1");
  for (const auto& [stage, n] : config.max_attempts)
    if (n < 1) throw Error(ErrorCode::config_invalid, "max_attempts must be >= 1");
  for (const auto& [stage, t] : config.agent_temperatures)
    if (t < 0.0 || t > 2.0) throw Error(ErrorCode::config_invalid, "temperature must be within [0, 2]");
}

json extract_json_object(const std::string& text) {
  const auto open = text.find('{');
  const auto close = text.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw Error(ErrorCode::schema_parse_failure, "no JSON object in model output");
  try {
    return json::parse(text.substr(open, close - open + 1));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::schema_parse_failure, std::string("invalid JSON in model output: ") + e.what());
  }
}

std::vector<QuestionSlot> draw_question_plan(std::uint64_t seed, const std::string& image_id, int attempt) {
  Rng rng(derive_seed(seed, "question-plan|" + image_id + "|" + std::to_string(attempt)));
  const std::size_t closed = kMinClosed + rng.below(kMaxClosed - kMinClosed + 1);
  std::vector<QuestionSlot> plan(kQuestionsPerImage);
  for (std::size_t i = 0; i < closed; ++i) {
    plan[i].mode = AnswerMode::closed;
    plan[i].closed_type = kClosedTypes[rng.below(kClosedTypes.size())];
  }
  for (std::size_t i = plan.size(); i > 1; --i) std::swap(plan[i - 1], plan[rng.below(i)]);
  return plan;
}

Caption generate_caption(const ImageRecord& image, const AgentContext& ctx, std::size_t ordinal, int attempt) {
  const auto& pool = ctx.config.providers;
  const std::string& provider = providers::rotate_provider(pool, Stage::caption, ordinal + attempt - 1);
  const double temperature = ctx.config.temperature(Stage::caption);
  json context{{"image_id", image.image_id}};
  auto prompt = make_prompt(ctx, "caption", context, image, temperature, ordinal_key(image, "caption", attempt));
  const auto response = call(ctx, provider, prompt);
  std::string text = trim(response.text);
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') text = trim(text.substr(1, text.size() - 2));
  if (text.empty()) throw Error(ErrorCode::empty_completion, provider + " returned an empty caption");
  return Caption{text, count_words(text), provider, temperature};
}

std::vector<QaItem> generate_questions(const ImageRecord& image, const Caption& caption,
                                       const std::optional<std::vector<DetectionAnnotation>>& detections,
                                       const AgentContext& ctx, std::size_t ordinal, int attempt) {
  const auto plan = draw_question_plan(ctx.config.seed, image.image_id, attempt);
  json plan_json = json::array();
  for (const auto& slot : plan) {
    json s{{"answer_mode", std::string(to_string(slot.mode))}};
    if (slot.closed_type) s["closed_type"] = std::string(to_string(*slot.closed_type));
    plan_json.push_back(std::move(s));
  }
  json context{{"image_id", image.image_id},
               {"caption", caption.text},
               {"detections", detections_json(detections)},
               {"plan", plan_json},
               {"count", kQuestionsPerImage}};
  const std::string& provider = providers::rotate_provider(ctx.config.providers, Stage::question, ordinal + attempt - 1);
  auto prompt = make_prompt(ctx, "question", context, image, ctx.config.temperature(Stage::question),
                            ordinal_key(image, "question", attempt));
  prompt.response_schema_hint = kQuestionSchema;
  const auto response = call(ctx, provider, prompt);

  const json doc = extract_json_object(response.text);
  const json& list = doc.contains("questions") ? doc["questions"] : json::array();
  if (!list.is_array() || list.size() != kQuestionsPerImage)
    throw Error(ErrorCode::schema_parse_failure, "expected exactly 5 questions");

  std::vector<QaItem> items;
  std::size_t closed = 0;
  try {
    for (std::size_t i = 0; i < list.size(); ++i) {
      const json& q = list[i];
      QaItem item;
      item.question_id = image.image_id + "_q" + std::to_string(i + 1);
      item.question_text = trim(q.at("question").get<std::string>());
      if (item.question_text.empty()) throw Error(ErrorCode::schema_parse_failure, "empty question text");
      item.answer_mode = enum_from_json<AnswerMode>(q.at("answer_mode"));
      if (item.answer_mode == AnswerMode::closed) {
        ++closed;
        item.closed_type = enum_from_json<ClosedType>(q.at("closed_type"));
      }
      item.difficulty = enum_from_json<Difficulty>(q.at("difficulty"));
      item.expected_answer_type = enum_from_json<ExpectedAnswerType>(q.at("expected_answer_type"));
      items.push_back(std::move(item));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema_parse_failure, std::string("question schema: ") + e.what());
  }
  if (closed < kMinClosed || closed > kMaxClosed)
    throw Error(ErrorCode::schema_parse_failure, "closed-ended count " + std::to_string(closed) + " outside 2..3");
  return items;
}

std::vector<Answer> generate_answers(const ImageRecord& image, const QaItem& item, const AgentContext& ctx,
                                     int attempt) {
  const auto& pool = ctx.config.providers;
  if (pool.size() < 2) throw Error(ErrorCode::config_invalid, "answer stage needs two providers");
  const int refill_cap = ctx.config.attempts_cap(Stage::answer);

  std::vector<Answer> answers;
  for (std::size_t batch = 0; batch < 2; ++batch) {
    const std::string& provider = pool[batch];
    std::vector<Answer> got;
    for (int pass = 0; got.size() < kAnswersPerProvider; ++pass) {
      if (pass >= refill_cap) {
        throw Error(ErrorCode::short_batch, provider + " returned " + std::to_string(got.size()) + " of " +
                                                std::to_string(kAnswersPerProvider) + " answers for " +
                                                item.question_id);
      }
      const std::size_t want = kAnswersPerProvider - got.size();
      json context{{"question_id", item.question_id},
                   {"question", item.question_text},
                   {"answer_mode", std::string(to_string(item.answer_mode))},
                   {"closed_type", item.closed_type ? std::string(to_string(*item.closed_type)) : ""},
                   {"expected_answer_type", std::string(to_string(item.expected_answer_type))},
                   {"count", want}};
      auto prompt = make_prompt(ctx, "answer", context, image, ctx.config.temperature(Stage::answer),
                                item.question_id + "/answer/" + std::to_string(attempt) + "/" +
                                    std::to_string(batch) + "/" + std::to_string(pass));
      prompt.response_schema_hint = kAnswerSchema;
      const auto response = call(ctx, provider, prompt);
      const json doc = extract_json_object(response.text);
      const json& list = doc.contains("answers") ? doc["answers"] : json::array();
      if (!list.is_array()) throw Error(ErrorCode::schema_parse_failure, "answers is not an array");
      for (const auto& a : list) {
        if (got.size() == kAnswersPerProvider) break;
        Answer ans;
        try {
          ans.text = trim(a.at("text").get<std::string>());
          ans.confidence = a.contains("confidence") ? parse_confidence(a["confidence"]) : Confidence::maybe;
          ans.answer_type = a.value("answer_type", std::string(to_string(item.expected_answer_type)));
        } catch (const json::exception& e) {
          throw Error(ErrorCode::schema_parse_failure, std::string("answer schema: ") + e.what());
        }
        if (ans.text.empty()) continue;
        ans.generator_model = provider;
        got.push_back(std::move(ans));
      }
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
      got[i].answer_id = static_cast<int>(batch * kAnswersPerProvider + i + 1);
      answers.push_back(std::move(got[i]));
    }
  }
  return answers;
}

Verdict validate(Stage stage, const Artifact& artifact, const ImageRecord& image, const AgentContext& ctx,
                 int attempt) {
  json context{{"image_id", image.image_id}};
  if (image.caption) context["caption"] = image.caption->text;
  std::string role;
  std::string key;
  Verdict verdict;
  switch (stage) {
    case Stage::caption: {
      const auto& cap = std::get<Caption>(artifact);
      context["caption"] = cap.text;
      role = "validate_caption";
      key = ordinal_key(image, role, attempt);
      verdict.mechanism = Mechanism::caption_image_relevance;
      break;
    }
    case Stage::question: {
      const auto& items = std::get<std::vector<QaItem>>(artifact);
      std::string lines;
      for (const auto& q : items) lines += "- " + q.question_text + "\n";
      context["questions"] = lines;
      role = "validate_question";
      key = ordinal_key(image, role, attempt);
      verdict.mechanism = Mechanism::question_sotif_relevance;
      break;
    }
    case Stage::answer: {
      const auto& item = std::get<QaItem>(artifact);
      std::vector<std::string> texts;
      std::string lines;
      for (const auto& a : item.answers) {
        texts.push_back(a.text);
        lines += std::to_string(a.answer_id) + ". " + a.text + "\n";
      }
      context["question_id"] = item.question_id;
      context["question"] = item.question_text;
      context["answers"] = texts;
      context["answers_text"] = lines;
      role = "validate_answer";
      key = item.question_id + "/validate_answer/" + std::to_string(attempt);
      verdict.mechanism = Mechanism::answer_correctness;
      break;
    }
  }
  // The answers placeholder renders as numbered lines rather than a JSON list.
  json render_ctx = context;
  if (render_ctx.contains("answers_text")) render_ctx["answers"] = render_ctx["answers_text"];
  auto prompt = make_prompt(ctx, role, render_ctx, image, kValidationTemperature, key);
  prompt.context = context;
  prompt.response_schema_hint = kVerdictSchema;
  const auto response = call(ctx, ctx.config.validator, prompt);
  try {
    const json doc = extract_json_object(response.text);
    verdict.pass = doc.at("pass").get<bool>();
    verdict.reason = doc.value("reason", "");
  } catch (const std::exception& e) {
    verdict.pass = false;
    verdict.reason = std::string("unparsable validation verdict: ") + e.what();
  }
  if (!verdict.pass && verdict.reason.empty()) verdict.reason = "validator rejected without a reason";
  return verdict;
}

ConsistencyReport consistency_probe(const QaItem& item, const ImageRecord& image, int trials,
                                    const AgentContext& ctx) {
  if (item.answer_mode != AnswerMode::closed)
    throw Error(ErrorCode::invalid_argument, "consistency probing applies to closed-ended items only");
  if (trials < 1) throw Error(ErrorCode::invalid_argument, "trials must be positive");
  if (ctx.config.providers.empty()) throw Error(ErrorCode::empty_pool, "provider pool is empty");
  const std::string& provider = ctx.config.providers.front();

  ConsistencyReport report;
  report.question_id = item.question_id;
  report.trials = trials;
  for (int t = 0; t < trials; ++t) {
    json context{{"question_id", item.question_id},
                 {"question", item.question_text},
                 {"closed_type", item.closed_type ? std::string(to_string(*item.closed_type)) : ""}};
    auto prompt = make_prompt(ctx, "probe", context, image, ctx.config.temperature(Stage::answer),
                              item.question_id + "/probe/" + std::to_string(t));
    const auto response = call(ctx, provider, prompt);
    std::string text = response.text;
    if (text.find('{') != std::string::npos) {
      try {
        text = extract_json_object(text).value("answer", text);
      } catch (const Error&) {
      }
    }
    report.answers.push_back(normalize_answer(text));
  }
  report.affirmative_count =
      static_cast<int>(std::count(report.answers.begin(), report.answers.end(), std::string("yes")));
  report.majority_answer = modal_answer(report.answers);
  report.consistent = std::set<std::string>(report.answers.begin(), report.answers.end()).size() <= 1;
  return report;
}

}  // namespace foundry::agents
