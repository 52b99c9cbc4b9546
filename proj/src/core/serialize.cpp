#include "foundry/core/serialize.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "foundry/core/error.h"

namespace foundry {

template <typename Enum>
Enum enum_from_json(const json& j) {
  if (!j.is_string()) throw Error(ErrorCode::schema_parse_failure, "expected enum string, got " + j.dump());
  auto v = parse_enum<Enum>(j.get<std::string>());
  if (!v) throw Error(ErrorCode::schema_parse_failure, "unknown enum value " + j.dump());
  return *v;
}

template Split enum_from_json<Split>(const json&);
template AnswerMode enum_from_json<AnswerMode>(const json&);
template ClosedType enum_from_json<ClosedType>(const json&);
template Difficulty enum_from_json<Difficulty>(const json&);
template ExpectedAnswerType enum_from_json<ExpectedAnswerType>(const json&);
template Confidence enum_from_json<Confidence>(const json&);
template Stage enum_from_json<Stage>(const json&);
template VerdictOutcome enum_from_json<VerdictOutcome>(const json&);
template RecordStatus enum_from_json<RecordStatus>(const json&);

namespace {

std::string str(std::string_view s) { return std::string(s); }

}  // namespace

void to_json(json& j, const Caption& v) {
  j = json{{"text", v.text},
           {"word_count", v.word_count},
           {"generator_model", v.generator_model},
           {"temperature", v.temperature}};
}

void from_json(const json& j, Caption& v) {
  j.at("text").get_to(v.text);
  j.at("word_count").get_to(v.word_count);
  j.at("generator_model").get_to(v.generator_model);
  j.at("temperature").get_to(v.temperature);
}

void to_json(json& j, const Answer& v) {
  j = json{{"answer_id", v.answer_id},
           {"text", v.text},
           {"confidence", str(to_string(v.confidence))},
           {"answer_type", v.answer_type},
           {"generator_model", v.generator_model}};
}

void from_json(const json& j, Answer& v) {
  j.at("answer_id").get_to(v.answer_id);
  j.at("text").get_to(v.text);
  v.confidence = enum_from_json<Confidence>(j.at("confidence"));
  v.answer_type = j.value("answer_type", "");
  v.generator_model = j.value("generator_model", "");
}

void to_json(json& j, const QaItem& v) {
  j = json{{"question_id", v.question_id},
           {"question_text", v.question_text},
           {"answer_mode", str(to_string(v.answer_mode))},
           {"difficulty", str(to_string(v.difficulty))},
           {"expected_answer_type", str(to_string(v.expected_answer_type))},
           {"answers", v.answers}};
  if (v.closed_type) j["closed_type"] = str(to_string(*v.closed_type));
  if (v.multiple_choice_answer) j["multiple_choice_answer"] = *v.multiple_choice_answer;
}

void from_json(const json& j, QaItem& v) {
  j.at("question_id").get_to(v.question_id);
  j.at("question_text").get_to(v.question_text);
  v.answer_mode = enum_from_json<AnswerMode>(j.at("answer_mode"));
  v.difficulty = enum_from_json<Difficulty>(j.at("difficulty"));
  v.expected_answer_type = enum_from_json<ExpectedAnswerType>(j.at("expected_answer_type"));
  v.answers = j.value("answers", std::vector<Answer>{});
  v.closed_type.reset();
  if (auto it = j.find("closed_type"); it != j.end() && !it->is_null())
    v.closed_type = enum_from_json<ClosedType>(*it);
  v.multiple_choice_answer.reset();
  if (auto it = j.find("multiple_choice_answer"); it != j.end() && !it->is_null())
    v.multiple_choice_answer = it->get<std::string>();
}

void to_json(json& j, const DetectionAnnotation& v) {
  j = json{{"label", v.label}, {"box", v.box}, {"uncertainty", v.uncertainty}};
}

void from_json(const json& j, DetectionAnnotation& v) {
  j.at("label").get_to(v.label);
  j.at("box").get_to(v.box);
  v.uncertainty = j.value("uncertainty", "");
}

void to_json(json& j, const TraceVerdict& v) {
  j = json{{"stage", str(to_string(v.stage))},
           {"attempt", v.attempt},
           {"verdict", str(to_string(v.verdict))},
           {"reason", v.reason}};
  if (!v.question_id.empty()) j["question_id"] = v.question_id;
}

void from_json(const json& j, TraceVerdict& v) {
  v.stage = enum_from_json<Stage>(j.at("stage"));
  j.at("attempt").get_to(v.attempt);
  v.verdict = enum_from_json<VerdictOutcome>(j.at("verdict"));
  v.reason = j.value("reason", "");
  v.question_id = j.value("question_id", "");
}

void to_json(json& j, const GenerationTrace& v) {
  j = json{{"caption_attempts", v.caption_attempts},
           {"question_attempts", v.question_attempts},
           {"answer_attempts", v.answer_attempts},
           {"verdicts", v.verdicts}};
}

void from_json(const json& j, GenerationTrace& v) {
  v.caption_attempts = j.value("caption_attempts", 0);
  v.question_attempts = j.value("question_attempts", 0);
  v.answer_attempts = j.value("answer_attempts", std::map<std::string, int>{});
  v.verdicts = j.value("verdicts", std::vector<TraceVerdict>{});
}

void to_json(json& j, const StageFailure& v) {
  j = json{{"stage", str(to_string(v.stage))}, {"reason", v.reason}};
  if (!v.question_id.empty()) j["question_id"] = v.question_id;
}

void from_json(const json& j, StageFailure& v) {
  v.stage = enum_from_json<Stage>(j.at("stage"));
  v.reason = j.value("reason", "");
  v.question_id = j.value("question_id", "");
}

void to_json(json& j, const ImageRecord& v) {
  j = json{{"image_id", v.image_id},
           {"file_path", v.file_path},
           {"qa_items", v.qa_items},
           {"trace", v.trace},
           {"split", str(to_string(v.split))},
           {"status", str(to_string(v.status))}};
  if (v.caption) j["caption"] = *v.caption;
  if (v.detections) j["detections"] = *v.detections;
  if (v.failure) j["failure"] = *v.failure;
  if (!v.notes.empty()) j["notes"] = v.notes;
}

void from_json(const json& j, ImageRecord& v) {
  j.at("image_id").get_to(v.image_id);
  v.file_path = j.value("file_path", "");
  v.qa_items = j.value("qa_items", std::vector<QaItem>{});
  v.trace = j.value("trace", GenerationTrace{});
  v.split = j.contains("split") ? enum_from_json<Split>(j.at("split")) : Split::unassigned;
  v.status = j.contains("status") ? enum_from_json<RecordStatus>(j.at("status")) : RecordStatus::pending;
  v.caption.reset();
  if (auto it = j.find("caption"); it != j.end() && !it->is_null()) v.caption = it->get<Caption>();
  v.detections.reset();
  if (auto it = j.find("detections"); it != j.end() && !it->is_null())
    v.detections = it->get<std::vector<DetectionAnnotation>>();
  v.failure.reset();
  if (auto it = j.find("failure"); it != j.end() && !it->is_null()) v.failure = it->get<StageFailure>();
  v.notes = j.value("notes", std::vector<std::string>{});
}

std::string serialize_record(const ImageRecord& record) { return json(record).dump(2); }

ImageRecord parse_record(std::string_view text) {
  try {
    return json::parse(text).get<ImageRecord>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema_parse_failure, std::string("record: ") + e.what());
  }
}

std::filesystem::path record_path(const std::filesystem::path& records_dir, std::string_view image_id) {
  return records_dir / (std::string(image_id) + ".json");
}

void save_record(const std::filesystem::path& records_dir, const ImageRecord& record) {
  write_text_file(record_path(records_dir, record.image_id), serialize_record(record));
}

ImageRecord load_record(const std::filesystem::path& file) { return parse_record(read_text_file(file)); }

std::vector<ImageRecord> load_records(const std::filesystem::path& records_dir) {
  if (!std::filesystem::is_directory(records_dir))
    throw Error(ErrorCode::io_error, "records directory not found: " + records_dir.string());
  std::vector<ImageRecord> out;
  for (const auto& entry : std::filesystem::directory_iterator(records_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(load_record(entry.path()));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.image_id < b.image_id; });
  return out;
}

json read_json_file(const std::filesystem::path& file) {
  try {
    return json::parse(read_text_file(file));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::schema_parse_failure, file.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& file, const json& value, int indent) {
  write_text_file(file, value.dump(indent) + "\n");
}

void write_text_file(const std::filesystem::path& file, std::string_view text) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  // Write-then-rename so readers never observe a torn file.
  auto tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + file.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
  }
  std::filesystem::rename(tmp, file);
}

std::string read_text_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace foundry
