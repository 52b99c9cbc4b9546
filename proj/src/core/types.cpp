#include "foundry/core/types.h"

#include <algorithm>
#include <utility>

namespace foundry {
namespace {

template <typename Enum, std::size_t N>
using NameTable = std::array<std::pair<Enum, std::string_view>, N>;

constexpr NameTable<Split, 3> kSplitNames{{
    {Split::train, "train"}, {Split::test, "test"}, {Split::unassigned, "unassigned"}}};
constexpr NameTable<AnswerMode, 2> kModeNames{{{AnswerMode::closed, "closed"}, {AnswerMode::open, "open"}}};
constexpr NameTable<ClosedType, 5> kClosedNames{{{ClosedType::uncertainty, "uncertainty"},
                                                 {ClosedType::existence, "existence"},
                                                 {ClosedType::type, "type"},
                                                 {ClosedType::counting, "counting"},
                                                 {ClosedType::key_object, "key_object"}}};
constexpr NameTable<Difficulty, 3> kDifficultyNames{
    {{Difficulty::easy, "easy"}, {Difficulty::medium, "medium"}, {Difficulty::hard, "hard"}}};
constexpr NameTable<ExpectedAnswerType, 5> kAnswerTypeNames{
    {{ExpectedAnswerType::analysis, "analysis"},
     {ExpectedAnswerType::yes_no_multiple_choice, "yes_no_multiple_choice"},
     {ExpectedAnswerType::recommendation, "recommendation"},
     {ExpectedAnswerType::count, "count"},
     {ExpectedAnswerType::identification, "identification"}}};
constexpr NameTable<Confidence, 3> kConfidenceNames{
    {{Confidence::yes, "yes"}, {Confidence::maybe, "maybe"}, {Confidence::no, "no"}}};
constexpr NameTable<Stage, 3> kStageNames{
    {{Stage::caption, "caption"}, {Stage::question, "question"}, {Stage::answer, "answer"}}};
constexpr NameTable<VerdictOutcome, 2> kVerdictNames{
    {{VerdictOutcome::pass, "pass"}, {VerdictOutcome::fail, "fail"}}};
constexpr NameTable<RecordStatus, 3> kStatusNames{{{RecordStatus::pending, "pending"},
                                                   {RecordStatus::complete, "complete"},
                                                   {RecordStatus::failed, "failed"}}};

template <typename Enum, std::size_t N>
std::string_view name_of(const NameTable<Enum, N>& table, Enum v) {
  for (const auto& [e, name] : table)
    if (e == v) return name;
  return "?";
}

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const NameTable<Enum, N>& table, std::string_view name) {
  for (const auto& [e, n] : table)
    if (n == name) return e;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Split v) { return name_of(kSplitNames, v); }
std::string_view to_string(AnswerMode v) { return name_of(kModeNames, v); }
std::string_view to_string(ClosedType v) { return name_of(kClosedNames, v); }
std::string_view to_string(Difficulty v) { return name_of(kDifficultyNames, v); }
std::string_view to_string(ExpectedAnswerType v) { return name_of(kAnswerTypeNames, v); }
std::string_view to_string(Confidence v) { return name_of(kConfidenceNames, v); }
std::string_view to_string(Stage v) { return name_of(kStageNames, v); }
std::string_view to_string(VerdictOutcome v) { return name_of(kVerdictNames, v); }
std::string_view to_string(RecordStatus v) { return name_of(kStatusNames, v); }

template <> std::optional<Split> parse_enum(std::string_view n) { return lookup(kSplitNames, n); }
template <> std::optional<AnswerMode> parse_enum(std::string_view n) { return lookup(kModeNames, n); }
template <> std::optional<ClosedType> parse_enum(std::string_view n) { return lookup(kClosedNames, n); }
template <> std::optional<Difficulty> parse_enum(std::string_view n) { return lookup(kDifficultyNames, n); }
template <> std::optional<ExpectedAnswerType> parse_enum(std::string_view n) {
  return lookup(kAnswerTypeNames, n);
}
template <> std::optional<Confidence> parse_enum(std::string_view n) { return lookup(kConfidenceNames, n); }
template <> std::optional<Stage> parse_enum(std::string_view n) { return lookup(kStageNames, n); }
template <> std::optional<VerdictOutcome> parse_enum(std::string_view n) { return lookup(kVerdictNames, n); }
template <> std::optional<RecordStatus> parse_enum(std::string_view n) { return lookup(kStatusNames, n); }

double PipelineConfig::temperature(Stage s) const {
  auto it = agent_temperatures.find(s);
  return it == agent_temperatures.end() ? 0.7 : it->second;
}

int PipelineConfig::attempts_cap(Stage s) const {
  auto it = max_attempts.find(s);
  return it == max_attempts.end() ? 5 : std::max(1, it->second);
}

}  // namespace foundry
