#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "foundry/core/types.h"

namespace foundry::dataset {

using nlohmann::json;

/// COCO and VQAv2 tooling expects integer ids. Images are numbered 1..n in
/// image_id order; the question at 0-based index k of image i gets i*1000 + k + 1.
using NumericIds = std::map<std::string, std::int64_t>;

NumericIds assign_numeric_ids(std::span<const ImageRecord> records);
std::int64_t numeric_question_id(std::int64_t image_number, std::size_t question_index);

/// {"images": [{id, file_name}], "annotations": [{id, image_id, caption}]}
json export_coco_captions(std::span<const ImageRecord> records, const NumericIds& ids);

struct VqaExport {
  json questions;    // {"questions": [{image_id, question, question_id}], ...}
  json annotations;  // {"annotations": [{question_id, image_id, question_type, answer_type,
                     //   multiple_choice_answer, answers: [{answer, answer_confidence, answer_id}]}], ...}
};
VqaExport export_vqa(std::span<const ImageRecord> records, const NumericIds& ids);

/// Sidecar carrying everything the two standard formats cannot: string ids,
/// question metadata, per-answer provenance, generation traces.
json export_metadata(std::span<const ImageRecord> records, const NumericIds& ids);

/// VQAv2 answer_type vocabulary ("yes/no", "number", "other").
std::string vqa_answer_type(ExpectedAnswerType type);
/// question_type written to annotations: closed type name, or "open".
std::string vqa_question_type(const QaItem& item);

struct CocoCaption {
  std::int64_t annotation_id = 0;
  std::int64_t image_id = 0;
  std::string file_name;
  std::string caption;
};
std::vector<CocoCaption> import_coco_captions(const json& doc);

struct VqaAnswerEntry {
  std::string answer;
  std::string answer_confidence;
  int answer_id = 0;
};

struct VqaEntry {
  std::int64_t question_id = 0;
  std::int64_t image_id = 0;
  std::string question;
  std::string question_type;
  std::string answer_type;
  std::string multiple_choice_answer;
  std::vector<VqaAnswerEntry> answers;
};
/// Joins a questions file and an annotations file by question_id. Throws
/// SchemaParseFailure when either side references an unknown question.
std::vector<VqaEntry> import_vqa(const json& questions, const json& annotations);

/// Rebuilds full records from the three standard-format files plus sidecar.
std::vector<ImageRecord> import_dataset(const json& captions, const json& questions, const json& annotations,
                                        const json& metadata);

/// Writes captions_/questions_/annotations_/metadata_<split>.json for every
/// split present. Throws IncompleteRecord on any non-complete record.
void write_dataset(std::span<const ImageRecord> records, const std::filesystem::path& out_dir);

/// Loads every split found in `dir` (or only `split`), sorted by image_id.
std::vector<ImageRecord> load_dataset(const std::filesystem::path& dir, std::optional<Split> split = std::nullopt);

}  // namespace foundry::dataset
