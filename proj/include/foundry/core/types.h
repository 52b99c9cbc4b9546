#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace foundry {

enum class Split { train, test, unassigned };
enum class AnswerMode { closed, open };
enum class ClosedType { uncertainty, existence, type, counting, key_object };
enum class Difficulty { easy, medium, hard };
enum class ExpectedAnswerType { analysis, yes_no_multiple_choice, recommendation, count, identification };
enum class Confidence { yes, maybe, no };
enum class Stage { caption, question, answer };
enum class VerdictOutcome { pass, fail };
enum class RecordStatus { pending, complete, failed };

inline constexpr std::array kClosedTypes{ClosedType::uncertainty, ClosedType::existence,
                                         ClosedType::type, ClosedType::counting,
                                         ClosedType::key_object};
inline constexpr std::array kStages{Stage::caption, Stage::question, Stage::answer};

inline constexpr std::size_t kQuestionsPerImage = 5;
inline constexpr std::size_t kAnswersPerQuestion = 10;
inline constexpr std::size_t kAnswersPerProvider = 5;
inline constexpr std::size_t kMinClosed = 2;
inline constexpr std::size_t kMaxClosed = 3;

std::string_view to_string(Split v);
std::string_view to_string(AnswerMode v);
std::string_view to_string(ClosedType v);
std::string_view to_string(Difficulty v);
std::string_view to_string(ExpectedAnswerType v);
std::string_view to_string(Confidence v);
std::string_view to_string(Stage v);
std::string_view to_string(VerdictOutcome v);
std::string_view to_string(RecordStatus v);

/// Parses the canonical lowercase name; nullopt on unknown input.
template <typename Enum>
std::optional<Enum> parse_enum(std::string_view name);
template <> std::optional<Split> parse_enum(std::string_view);
template <> std::optional<AnswerMode> parse_enum(std::string_view);
template <> std::optional<ClosedType> parse_enum(std::string_view);
template <> std::optional<Difficulty> parse_enum(std::string_view);
template <> std::optional<ExpectedAnswerType> parse_enum(std::string_view);
template <> std::optional<Confidence> parse_enum(std::string_view);
template <> std::optional<Stage> parse_enum(std::string_view);
template <> std::optional<VerdictOutcome> parse_enum(std::string_view);
template <> std::optional<RecordStatus> parse_enum(std::string_view);

struct Caption {
  std::string text;
  std::size_t word_count = 0;
  std::string generator_model;
  double temperature = 0.0;

  friend bool operator==(const Caption&, const Caption&) = default;
};

struct Answer {
  int answer_id = 0;
  std::string text;
  Confidence confidence = Confidence::yes;
  std::string answer_type;
  std::string generator_model;

  friend bool operator==(const Answer&, const Answer&) = default;
};

struct QaItem {
  std::string question_id;
  std::string question_text;
  AnswerMode answer_mode = AnswerMode::open;
  std::optional<ClosedType> closed_type;
  Difficulty difficulty = Difficulty::medium;
  ExpectedAnswerType expected_answer_type = ExpectedAnswerType::analysis;
  std::vector<Answer> answers;
  std::optional<std::string> multiple_choice_answer;

  friend bool operator==(const QaItem&, const QaItem&) = default;
};

/// Opaque detector output forwarded to the question agent as prompt context.
struct DetectionAnnotation {
  std::string label;
  std::array<double, 4> box{};  // x, y, width, height
  std::string uncertainty;

  friend bool operator==(const DetectionAnnotation&, const DetectionAnnotation&) = default;
};

struct TraceVerdict {
  Stage stage = Stage::caption;
  int attempt = 1;
  VerdictOutcome verdict = VerdictOutcome::pass;
  std::string reason;
  std::string question_id;  // answer stage only

  friend bool operator==(const TraceVerdict&, const TraceVerdict&) = default;
};

struct GenerationTrace {
  int caption_attempts = 0;
  int question_attempts = 0;
  std::map<std::string, int> answer_attempts;
  std::vector<TraceVerdict> verdicts;

  friend bool operator==(const GenerationTrace&, const GenerationTrace&) = default;
};

struct StageFailure {
  Stage stage = Stage::caption;
  std::string question_id;
  std::string reason;

  friend bool operator==(const StageFailure&, const StageFailure&) = default;
};

struct ImageRecord {
  std::string image_id;
  std::string file_path;
  std::optional<Caption> caption;
  std::vector<QaItem> qa_items;
  std::optional<std::vector<DetectionAnnotation>> detections;
  GenerationTrace trace;
  Split split = Split::unassigned;
  RecordStatus status = RecordStatus::pending;
  std::optional<StageFailure> failure;
  std::vector<std::string> notes;  // provenance of manual edits

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct PipelineConfig {
  std::vector<std::string> providers;
  std::string validator;
  std::map<Stage, double> agent_temperatures{
      {Stage::caption, 0.7}, {Stage::question, 0.9}, {Stage::answer, 1.0}};
  std::map<Stage, int> max_attempts{{Stage::caption, 5}, {Stage::question, 5}, {Stage::answer, 5}};
  int parallelism = 1;
  std::uint64_t seed = 0;

  double temperature(Stage s) const;
  int attempts_cap(Stage s) const;
};

}  // namespace foundry
