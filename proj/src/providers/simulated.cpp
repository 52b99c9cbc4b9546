#include "foundry/providers/simulated.h"

#include <array>

#include "foundry/core/text.h"

namespace foundry::providers {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 5> kObjects{"vehicle", "pedestrian", "traffic light", "cyclist", "truck"};
constexpr std::array<std::string_view, 5> kObjectPlurals{"vehicles", "pedestrians", "traffic lights",
                                                         "cyclists", "trucks"};
constexpr std::array<std::string_view, 11> kCountWords{"zero", "one", "two", "three", "four", "five",
                                                       "six", "seven", "eight", "nine", "ten"};

constexpr std::array<std::string_view, 4> kOpenQuestions{
    "What are the perception-related SOTIF risks evident in this image?",
    "What specific environmental factor in the image degrades the perception ability of an automated driving system?",
    "What action could a driver or an automated driving system take to reduce the perception risk in this scene?",
    "Why could a camera-based perception system misdetect objects in this scene?"};

constexpr std::array<std::string_view, 4> kOpenAnswers{
    "Rain on the windshield and glare from oncoming headlights reduce visibility of lane markings and vehicles.",
    "The low sun angle causes lens flare which hides pedestrians and traffic lights from the camera.",
    "Reducing speed and increasing following distance gives the perception system more time to confirm detections.",
    "Improving camera dynamic range and using sensor fusion with radar would mitigate the degraded visibility."};

std::string pick(Rng& rng, std::span<const std::string_view> options) {
  return std::string(options[rng.below(options.size())]);
}

std::string pick(Rng& rng, const std::vector<std::string>& options) { return options[rng.below(options.size())]; }

std::string object_for(const json& ctx, Rng& rng, bool plural) {
  if (auto it = ctx.find("detections"); it != ctx.end() && it->is_array() && !it->empty()) {
    const auto& d = (*it)[rng.below(it->size())];
    std::string label = d.value("label", "object");
    return plural ? label + "s" : label;
  }
  const auto idx = rng.below(kObjects.size());
  return std::string(plural ? kObjectPlurals[idx] : kObjects[idx]);
}

std::string closed_question_text(ClosedType type, const json& ctx, Rng& rng) {
  switch (type) {
    case ClosedType::uncertainty:
      return "What is the uncertainty level (low, medium, high) of the detected " + object_for(ctx, rng, false) + "?";
    case ClosedType::existence:
      return "Does a " + object_for(ctx, rng, false) + " exist in this image?";
    case ClosedType::type:
      return "What is the type of the object at the bottom left of the image?";
    case ClosedType::counting:
      return "How many " + object_for(ctx, rng, true) + " are there?";
    case ClosedType::key_object:
      return "Is the " + object_for(ctx, rng, false) + " a key object for the driving decision?";
  }
  return "";
}

ExpectedAnswerType expected_type_for(ClosedType type) {
  switch (type) {
    case ClosedType::counting: return ExpectedAnswerType::count;
    case ClosedType::type: return ExpectedAnswerType::identification;
    default: return ExpectedAnswerType::yes_no_multiple_choice;
  }
}

Difficulty draw_difficulty(Rng& rng) {
  const double u = rng.uniform();
  if (u < 0.4) return Difficulty::easy;
  if (u < 0.8) return Difficulty::medium;
  return Difficulty::hard;
}

// Per-question "true" answer, stable across calls so that a zero
// inconsistency rate yields identical answers on repeated queries.
std::string base_closed_answer(const json& ctx, std::uint64_t seed) {
  const std::string qid = ctx.value("question_id", ctx.value("question", std::string{}));
  Rng truth(derive_seed(seed, "truth|" + qid));
  const auto type = parse_enum<ClosedType>(ctx.value("closed_type", std::string{"existence"}))
                        .value_or(ClosedType::existence);
  switch (type) {
    case ClosedType::counting: return std::string(kCountWords[1 + truth.below(6)]);
    case ClosedType::uncertainty: {
      constexpr std::array<std::string_view, 3> levels{"low", "medium", "high"};
      return std::string(levels[truth.below(3)]);
    }
    case ClosedType::type: return std::string(kObjects[truth.below(kObjects.size())]);
    default: return truth.bernoulli(0.5) ? "yes" : "no";
  }
}

std::string perturb(const std::string& answer, const json& ctx, Rng& rng) {
  const auto type = parse_enum<ClosedType>(ctx.value("closed_type", std::string{"existence"}))
                        .value_or(ClosedType::existence);
  if (type == ClosedType::existence || type == ClosedType::key_object)
    return answer == "yes" ? "no" : "yes";
  if (type == ClosedType::counting) return std::string(kCountWords[1 + rng.below(6)]);
  return answer + " or unclear";
}

}  // namespace

const std::vector<std::string>& default_caption_templates() {
  static const std::vector<std::string> kTemplates{
      "Driving in heavy rain, the windshield is covered in water droplets, making visibility of the traffic ahead poor.",
      "A driver's perspective of a busy intersection during sunset, highlighting the challenges of low sun glare in urban driving.",
      "Dense fog on a rural highway hides the lane markings and reduces the visible distance to the vehicles ahead.",
      "Night driving on a wet city street where headlight glare and reflections obscure pedestrians near the crosswalk ahead.",
      "Snow covers the road surface and signs, making lane boundaries and a parked truck difficult to distinguish from the background."};
  return kTemplates;
}

SimulatedProvider::SimulatedProvider(std::string id, SimulatedProviderScript script)
    : id_(std::move(id)), script_(std::move(script)) {
  default_behavior_.latency.sigma = 0.0;
}

const StageBehavior& SimulatedProvider::behavior_for(const std::string& purpose) const {
  auto it = script_.stage_behaviors.find(purpose);
  return it == script_.stage_behaviors.end() ? default_behavior_ : it->second;
}

ProviderResponse SimulatedProvider::complete(const VisionPrompt& prompt) {
  std::size_t key_call = 0;
  std::optional<std::string> scripted;
  bool fail = false;
  {
    std::lock_guard lock(mu_);
    ++total_calls_;
    ++calls_by_purpose_[prompt.purpose];
    key_call = calls_by_key_[prompt.purpose + "|" + prompt.request_key]++;
    log_.push_back({prompt.purpose, prompt.request_key, prompt.temperature, prompt.max_output_tokens,
                    prompt.system_text, prompt.user_text, prompt.image_path});
    if (script_.always_fail || script_.fail_first_calls > 0) {
      if (script_.fail_first_calls > 0) --script_.fail_first_calls;
      fail = true;
    } else if (auto it = script_.scripted_responses.find(prompt.purpose);
               it != script_.scripted_responses.end() && !it->second.empty()) {
      scripted = std::move(it->second.front());
      it->second.pop_front();
    }
  }
  if (fail) throw TransportError(script_.failure_class, id_ + ": injected transport failure");

  Rng rng(derive_seed(script_.seed,
                      id_ + "|" + prompt.purpose + "|" + prompt.request_key + "|" + std::to_string(key_call)));
  const StageBehavior& behavior = behavior_for(prompt.purpose);
  ProviderResponse response;
  response.model = id_;
  response.text = scripted ? *scripted : generate(prompt, behavior, rng);
  response.latency = Seconds(behavior.latency.mean_s * rng.lognormal_unit_mean(behavior.latency.sigma));
  response.token_usage = TokenUsage{static_cast<int>(count_words(prompt.system_text) + count_words(prompt.user_text)),
                                    static_cast<int>(count_words(response.text))};
  return response;
}

std::string SimulatedProvider::generate(const VisionPrompt& prompt, const StageBehavior& behavior,
                                        Rng& rng) const {
  const json& ctx = prompt.context;
  const std::string& purpose = prompt.purpose;

  if (purpose == "caption") {
    return behavior.response_templates.empty() ? pick(rng, default_caption_templates())
                                               : pick(rng, behavior.response_templates);
  }

  if (purpose == "question") {
    json questions = json::array();
    for (const auto& slot : ctx.value("plan", json::array())) {
      json q;
      if (slot.value("answer_mode", "open") == "closed") {
        const auto type = parse_enum<ClosedType>(slot.value("closed_type", "existence")).value_or(ClosedType::existence);
        q["question"] = closed_question_text(type, ctx, rng);
        q["answer_mode"] = "closed";
        q["closed_type"] = std::string(to_string(type));
        q["expected_answer_type"] = std::string(to_string(expected_type_for(type)));
      } else {
        q["question"] = behavior.response_templates.empty() ? pick(rng, kOpenQuestions)
                                                            : pick(rng, behavior.response_templates);
        q["answer_mode"] = "open";
        q["expected_answer_type"] = rng.bernoulli(0.67) ? "analysis" : "recommendation";
      }
      q["difficulty"] = std::string(to_string(draw_difficulty(rng)));
      questions.push_back(std::move(q));
    }
    return json{{"questions", questions}}.dump();
  }

  if (purpose == "answer") {
    const int count = ctx.value("count", 5);
    const bool closed = ctx.value("answer_mode", "open") == "closed";
    const std::string truth = closed ? base_closed_answer(ctx, script_.seed) : std::string{};
    json answers = json::array();
    for (int i = 0; i < count; ++i) {
      std::string text;
      if (!behavior.response_templates.empty()) {
        text = pick(rng, behavior.response_templates);
      } else if (closed) {
        text = rng.bernoulli(behavior.inconsistency_rate) ? perturb(truth, ctx, rng) : truth;
      } else {
        text = pick(rng, kOpenAnswers);
      }
      const double u = rng.uniform();
      const char* confidence = u < 0.75 ? "yes" : (u < 0.95 ? "maybe" : "no");
      answers.push_back({{"text", text},
                         {"confidence", confidence},
                         {"answer_type", ctx.value("expected_answer_type", "analysis")}});
    }
    return json{{"answers", answers}}.dump();
  }

  if (purpose.rfind("validate_", 0) == 0) {
    if (purpose == "validate_answer" && ctx.contains("question_id")) {
      auto gt = script_.ground_truth.find(ctx["question_id"].get<std::string>());
      if (gt != script_.ground_truth.end()) {
        std::vector<std::string> texts = ctx.value("answers", std::vector<std::string>{});
        if (modal_answer(texts) != normalize_answer(gt->second))
          return json{{"pass", false}, {"reason", "answers contradict the image content"}}.dump();
      }
    }
    const bool pass = rng.bernoulli(behavior.validation_pass_probability);
    return json{{"pass", pass}, {"reason", pass ? "consistent with image and SOTIF context"
                                                : "not grounded in the image or SOTIF context"}}
        .dump();
  }

  if (purpose == "probe") {
    if (!behavior.response_templates.empty()) return pick(rng, behavior.response_templates);
    const std::string truth = base_closed_answer(ctx, script_.seed);
    return rng.bernoulli(behavior.inconsistency_rate) ? perturb(truth, ctx, rng) : truth;
  }

  if (purpose == "judge") {
    if (!behavior.response_templates.empty()) return pick(rng, behavior.response_templates);
    auto score = [&] { return 3 + static_cast<int>(rng.below(3)); };
    return json{{"relevance", score()}, {"trustworthiness", score()}, {"clarity", score()}, {"coherence", score()}}
        .dump();
  }

  return behavior.response_templates.empty() ? std::string("ok") : pick(rng, behavior.response_templates);
}

std::size_t SimulatedProvider::call_count(const std::string& purpose) const {
  std::lock_guard lock(mu_);
  if (purpose.empty()) return total_calls_;
  auto it = calls_by_purpose_.find(purpose);
  return it == calls_by_purpose_.end() ? 0 : it->second;
}

std::vector<RequestLogEntry> SimulatedProvider::request_log() const {
  std::lock_guard lock(mu_);
  return log_;
}

}  // namespace foundry::providers
