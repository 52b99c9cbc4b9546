#include "foundry/eval/judge.h"

#include <cctype>
#include <numeric>

#include "foundry/core/error.h"

namespace foundry::eval {
namespace {

bool in_range(int v) { return v >= 1 && v <= 5; }

std::optional<std::array<int, 4>> from_object(const nlohmann::json& obj) {
  if (!obj.is_object()) return std::nullopt;
  std::array<int, 4> out{};
  for (std::size_t i = 0; i < kRubricCriteria.size(); ++i) {
    auto it = obj.find(kRubricCriteria[i]);
    if (it == obj.end() || !it->is_number_integer()) return std::nullopt;
    out[i] = it->get<int>();
    if (!in_range(out[i])) return std::nullopt;
  }
  return out;
}

}  // namespace

std::optional<std::array<int, 4>> parse_judgment(const std::string& text) {
  auto begin = text.find('{');
  auto end = text.rfind('}');
  if (begin != std::string::npos && end != std::string::npos && end > begin) {
    auto obj = nlohmann::json::parse(text.substr(begin, end - begin + 1), nullptr, false);
    if (!obj.is_discarded()) return from_object(obj);
  }

  std::vector<long> numbers;
  for (std::size_t i = 0; i < text.size() && numbers.size() < 4;) {
    if (std::isdigit(static_cast<unsigned char>(text[i]))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      numbers.push_back(j - i > 6 ? 1000000 : std::stol(text.substr(i, j - i)));
      i = j;
    } else {
      ++i;
    }
  }
  if (numbers.size() != 4) return std::nullopt;
  std::array<int, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (numbers[i] < 1 || numbers[i] > 5) return std::nullopt;
    out[i] = static_cast<int>(numbers[i]);
  }
  return out;
}

RubricScores aggregate_rubric(std::vector<std::array<int, 4>> raw) {
  RubricScores s;
  s.repetitions = static_cast<int>(raw.size());
  if (raw.empty()) return s;
  std::array<double, 4> sums{};
  for (const auto& r : raw)
    for (std::size_t i = 0; i < 4; ++i) sums[i] += r[i];
  const double n = static_cast<double>(raw.size());
  s.relevance = sums[0] / n;
  s.trustworthiness = sums[1] / n;
  s.clarity = sums[2] / n;
  s.coherence = sums[3] / n;
  s.overall = (s.relevance + s.trustworthiness + s.clarity + s.coherence) / 4.0;
  s.per_repetition_raw = std::move(raw);
  return s;
}

RubricScores judge_open_ended(const JudgeRequest& request, const JudgeContext& ctx) {
  if (ctx.registry == nullptr || ctx.config.provider.empty())
    throw Error(ErrorCode::config_invalid, "judge provider not configured");
  if (ctx.config.repetitions < 1) throw Error(ErrorCode::config_invalid, "judge repetitions must be >= 1");

  const auto& tmpl = ctx.prompts.get("judge");
  const nlohmann::json values{
      {"question", request.question}, {"reference", request.reference}, {"response", request.response}};

  std::vector<std::array<int, 4>> raw;
  for (int rep = 1; rep <= ctx.config.repetitions; ++rep) {
    std::optional<std::array<int, 4>> parsed;
    std::string last;
    for (int ask = 1; ask <= 2 && !parsed; ++ask) {
      providers::VisionPrompt prompt;
      prompt.system_text = agents::render(tmpl.system, values);
      prompt.user_text = agents::render(tmpl.user, values);
      if (!request.image_path.empty()) prompt.image_path = request.image_path;
      prompt.temperature = ctx.config.temperature;
      prompt.max_output_tokens = 128;
      prompt.response_schema_hint =
          R"({"relevance": int, "trustworthiness": int, "clarity": int, "coherence": int})";
      prompt.purpose = "judge";
      prompt.request_key = request.item_id + "/judge/" + std::to_string(rep) + "/" + std::to_string(ask);
      prompt.context = values;
      last = providers::complete_vision(*ctx.registry, ctx.config.provider, prompt, ctx.retry, ctx.sleep).text;
      parsed = parse_judgment(last);
    }
    if (!parsed)
      throw Error(ErrorCode::unparsable_judgment,
                  "judge reply for " + request.item_id + " not parsable after re-ask: " + last);
    raw.push_back(*parsed);
  }
  return aggregate_rubric(std::move(raw));
}

RubricScores mean_rubric(const std::vector<RubricScores>& items) {
  RubricScores s;
  if (items.empty()) return s;
  for (const auto& it : items) {
    s.relevance += it.relevance;
    s.trustworthiness += it.trustworthiness;
    s.clarity += it.clarity;
    s.coherence += it.coherence;
    s.overall += it.overall;
  }
  const double n = static_cast<double>(items.size());
  s.relevance /= n;
  s.trustworthiness /= n;
  s.clarity /= n;
  s.coherence /= n;
  s.overall /= n;
  s.repetitions = items.front().repetitions;
  return s;
}

nlohmann::json to_json(const RubricScores& s) {
  nlohmann::json j{{"relevance", s.relevance},     {"trustworthiness", s.trustworthiness},
                   {"clarity", s.clarity},         {"coherence", s.coherence},
                   {"overall", s.overall},         {"repetitions", s.repetitions}};
  if (!s.per_repetition_raw.empty()) j["per_repetition_raw"] = s.per_repetition_raw;
  return j;
}

}  // namespace foundry::eval
