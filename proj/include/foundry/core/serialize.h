#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "foundry/core/types.h"

namespace foundry {

using json = nlohmann::json;

// Canonical record schema. Field names match the C++ members; enums are
// written as their lowercase names; absent optionals are omitted.
void to_json(json& j, const Caption& v);
void from_json(const json& j, Caption& v);
void to_json(json& j, const Answer& v);
void from_json(const json& j, Answer& v);
void to_json(json& j, const QaItem& v);
void from_json(const json& j, QaItem& v);
void to_json(json& j, const DetectionAnnotation& v);
void from_json(const json& j, DetectionAnnotation& v);
void to_json(json& j, const TraceVerdict& v);
void from_json(const json& j, TraceVerdict& v);
void to_json(json& j, const GenerationTrace& v);
void from_json(const json& j, GenerationTrace& v);
void to_json(json& j, const StageFailure& v);
void from_json(const json& j, StageFailure& v);
void to_json(json& j, const ImageRecord& v);
void from_json(const json& j, ImageRecord& v);

/// Enum <-> JSON string; throws Error(schema_parse_failure) on unknown names.
template <typename Enum>
Enum enum_from_json(const json& j);

std::string serialize_record(const ImageRecord& record);
ImageRecord parse_record(std::string_view text);

/// records/<image_id>.json
std::filesystem::path record_path(const std::filesystem::path& records_dir, std::string_view image_id);
void save_record(const std::filesystem::path& records_dir, const ImageRecord& record);
ImageRecord load_record(const std::filesystem::path& file);
/// All *.json records in a directory, sorted by image_id.
std::vector<ImageRecord> load_records(const std::filesystem::path& records_dir);

json read_json_file(const std::filesystem::path& file);
void write_json_file(const std::filesystem::path& file, const json& value, int indent = 2);
void write_text_file(const std::filesystem::path& file, std::string_view text);
std::string read_text_file(const std::filesystem::path& file);

}  // namespace foundry
