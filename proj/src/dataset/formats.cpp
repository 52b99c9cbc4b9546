#include "foundry/dataset/formats.h"

#include <algorithm>

#include "foundry/core/error.h"
#include "foundry/core/serialize.h"

namespace foundry::dataset {
namespace {

void require_complete(const ImageRecord& r) {
  if (r.status != RecordStatus::complete || !r.caption || r.qa_items.size() != kQuestionsPerImage)
    throw Error(ErrorCode::incomplete_record, "record " + r.image_id + " is not complete");
}

std::int64_t id_of(const NumericIds& ids, const std::string& image_id) {
  auto it = ids.find(image_id);
  if (it == ids.end()) throw Error(ErrorCode::id_mismatch, "no numeric id for image " + image_id);
  return it->second;
}

json info_block() {
  return json{{"description", "SOTIF driving-scene VQA and caption annotations"}, {"version", "1.0"}};
}

std::string split_name(std::span<const ImageRecord> records) {
  return records.empty() ? "unassigned" : std::string(to_string(records.front().split));
}

}  // namespace

NumericIds assign_numeric_ids(std::span<const ImageRecord> records) {
  std::vector<std::string> names;
  for (const auto& r : records) names.push_back(r.image_id);
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  NumericIds ids;
  for (std::size_t i = 0; i < names.size(); ++i) ids[names[i]] = static_cast<std::int64_t>(i + 1);
  return ids;
}

std::int64_t numeric_question_id(std::int64_t image_number, std::size_t question_index) {
  return image_number * 1000 + static_cast<std::int64_t>(question_index) + 1;
}

std::string vqa_answer_type(ExpectedAnswerType type) {
  switch (type) {
    case ExpectedAnswerType::yes_no_multiple_choice: return "yes/no";
    case ExpectedAnswerType::count: return "number";
    default: return "other";
  }
}

std::string vqa_question_type(const QaItem& item) {
  return item.closed_type ? std::string(to_string(*item.closed_type)) : "open";
}

json export_coco_captions(std::span<const ImageRecord> records, const NumericIds& ids) {
  json images = json::array();
  json annotations = json::array();
  for (const auto& r : records) {
    require_complete(r);
    const auto id = id_of(ids, r.image_id);
    images.push_back({{"id", id}, {"file_name", std::filesystem::path(r.file_path).filename().string()}});
    annotations.push_back({{"id", id}, {"image_id", id}, {"caption", r.caption->text}});
  }
  return json{{"info", info_block()},
              {"licenses", json::array()},
              {"type", "captions"},
              {"images", images},
              {"annotations", annotations}};
}

VqaExport export_vqa(std::span<const ImageRecord> records, const NumericIds& ids) {
  json questions = json::array();
  json annotations = json::array();
  for (const auto& r : records) {
    require_complete(r);
    const auto image_num = id_of(ids, r.image_id);
    for (std::size_t k = 0; k < r.qa_items.size(); ++k) {
      const QaItem& q = r.qa_items[k];
      if (q.answers.size() != kAnswersPerQuestion)
        throw Error(ErrorCode::incomplete_record, "question " + q.question_id + " does not have 10 answers");
      const auto qid = numeric_question_id(image_num, k);
      questions.push_back({{"image_id", image_num}, {"question", q.question_text}, {"question_id", qid}});
      json answers = json::array();
      for (const auto& a : q.answers) {
        answers.push_back({{"answer", a.text},
                           {"answer_confidence", std::string(to_string(a.confidence))},
                           {"answer_id", a.answer_id}});
      }
      annotations.push_back({{"question_id", qid},
                             {"image_id", image_num},
                             {"question_type", vqa_question_type(q)},
                             {"answer_type", vqa_answer_type(q.expected_answer_type)},
                             {"multiple_choice_answer", q.multiple_choice_answer.value_or("")},
                             {"answers", answers}});
    }
  }
  const std::string subtype = split_name(records);
  VqaExport out;
  out.questions = json{{"info", info_block()},
                       {"task_type", "Open-Ended"},
                       {"data_type", "sotif-vqa"},
                       {"data_subtype", subtype},
                       {"license", json::object()},
                       {"questions", questions}};
  out.annotations = json{{"info", info_block()},
                         {"data_type", "sotif-vqa"},
                         {"data_subtype", subtype},
                         {"license", json::object()},
                         {"annotations", annotations}};
  return out;
}

json export_metadata(std::span<const ImageRecord> records, const NumericIds& ids) {
  json images = json::object();
  json questions = json::object();
  for (const auto& r : records) {
    require_complete(r);
    const auto image_num = id_of(ids, r.image_id);
    json img{{"image_id", r.image_id},
             {"file_path", r.file_path},
             {"split", std::string(to_string(r.split))},
             {"status", std::string(to_string(r.status))},
             {"caption", {{"generator_model", r.caption->generator_model},
                          {"temperature", r.caption->temperature},
                          {"word_count", r.caption->word_count}}},
             {"trace", r.trace}};
    if (r.detections) img["detections"] = *r.detections;
    if (r.failure) img["failure"] = *r.failure;
    if (!r.notes.empty()) img["notes"] = r.notes;
    images[std::to_string(image_num)] = std::move(img);

    for (std::size_t k = 0; k < r.qa_items.size(); ++k) {
      const QaItem& q = r.qa_items[k];
      json answers = json::array();
      for (const auto& a : q.answers) {
        answers.push_back(
            {{"answer_id", a.answer_id}, {"answer_type", a.answer_type}, {"generator_model", a.generator_model}});
      }
      json meta{{"question_id", q.question_id},
                {"image_id", r.image_id},
                {"index", k},
                {"answer_mode", std::string(to_string(q.answer_mode))},
                {"difficulty", std::string(to_string(q.difficulty))},
                {"expected_answer_type", std::string(to_string(q.expected_answer_type))},
                {"has_multiple_choice_answer", q.multiple_choice_answer.has_value()},
                {"sotif_open_ended", q.answer_mode == AnswerMode::open},
                {"answers", answers}};
      if (q.closed_type) meta["closed_type"] = std::string(to_string(*q.closed_type));
      questions[std::to_string(numeric_question_id(image_num, k))] = std::move(meta);
    }
  }
  return json{{"format", "foundry-metadata"},
              {"version", 1},
              {"split", split_name(records)},
              {"images", images},
              {"questions", questions}};
}

std::vector<CocoCaption> import_coco_captions(const json& doc) {
  std::vector<CocoCaption> out;
  try {
    std::map<std::int64_t, std::string> files;
    for (const auto& img : doc.at("images")) files[img.at("id").get<std::int64_t>()] = img.value("file_name", "");
    for (const auto& a : doc.at("annotations")) {
      CocoCaption c;
      c.annotation_id = a.at("id").get<std::int64_t>();
      c.image_id = a.at("image_id").get<std::int64_t>();
      c.caption = a.at("caption").get<std::string>();
      auto it = files.find(c.image_id);
      if (it == files.end())
        throw Error(ErrorCode::schema_parse_failure, "caption references unknown image " + std::to_string(c.image_id));
      c.file_name = it->second;
      out.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema_parse_failure, std::string("COCO captions: ") + e.what());
  }
  return out;
}

std::vector<VqaEntry> import_vqa(const json& questions, const json& annotations) {
  std::vector<VqaEntry> out;
  try {
    std::map<std::int64_t, const json*> by_id;
    for (const auto& q : questions.at("questions")) by_id[q.at("question_id").get<std::int64_t>()] = &q;
    if (by_id.size() != annotations.at("annotations").size())
      throw Error(ErrorCode::schema_parse_failure, "questions and annotations differ in count");
    for (const auto& a : annotations.at("annotations")) {
      VqaEntry e;
      e.question_id = a.at("question_id").get<std::int64_t>();
      auto it = by_id.find(e.question_id);
      if (it == by_id.end())
        throw Error(ErrorCode::schema_parse_failure, "annotation for unknown question " + std::to_string(e.question_id));
      e.image_id = a.at("image_id").get<std::int64_t>();
      if (it->second->at("image_id").get<std::int64_t>() != e.image_id)
        throw Error(ErrorCode::schema_parse_failure, "image_id mismatch for question " + std::to_string(e.question_id));
      e.question = it->second->at("question").get<std::string>();
      e.question_type = a.value("question_type", "");
      e.answer_type = a.value("answer_type", "");
      e.multiple_choice_answer = a.value("multiple_choice_answer", "");
      for (const auto& ans : a.at("answers")) {
        e.answers.push_back({ans.at("answer").get<std::string>(), ans.value("answer_confidence", "yes"),
                             ans.at("answer_id").get<int>()});
      }
      out.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema_parse_failure, std::string("VQA files: ") + e.what());
  }
  return out;
}

std::vector<ImageRecord> import_dataset(const json& captions, const json& questions, const json& annotations,
                                        const json& metadata) {
  const auto caps = import_coco_captions(captions);
  const auto entries = import_vqa(questions, annotations);
  std::map<std::int64_t, ImageRecord> records;
  try {
    const json& images_meta = metadata.at("images");
    for (const auto& c : caps) {
      const json& m = images_meta.at(std::to_string(c.image_id));
      ImageRecord r;
      r.image_id = m.at("image_id").get<std::string>();
      r.file_path = m.value("file_path", c.file_name);
      r.split = enum_from_json<Split>(m.at("split"));
      r.status = enum_from_json<RecordStatus>(m.at("status"));
      const json& cm = m.at("caption");
      r.caption = Caption{c.caption, cm.at("word_count").get<std::size_t>(), cm.at("generator_model").get<std::string>(),
                          cm.at("temperature").get<double>()};
      r.trace = m.at("trace").get<GenerationTrace>();
      if (m.contains("detections")) r.detections = m["detections"].get<std::vector<DetectionAnnotation>>();
      if (m.contains("failure")) r.failure = m["failure"].get<StageFailure>();
      r.notes = m.value("notes", std::vector<std::string>{});
      records.emplace(c.image_id, std::move(r));
    }

    const json& questions_meta = metadata.at("questions");
    std::map<std::int64_t, std::vector<std::pair<std::size_t, QaItem>>> items;
    for (const auto& e : entries) {
      const json& m = questions_meta.at(std::to_string(e.question_id));
      QaItem q;
      q.question_id = m.at("question_id").get<std::string>();
      q.question_text = e.question;
      q.answer_mode = enum_from_json<AnswerMode>(m.at("answer_mode"));
      if (m.contains("closed_type")) q.closed_type = enum_from_json<ClosedType>(m["closed_type"]);
      q.difficulty = enum_from_json<Difficulty>(m.at("difficulty"));
      q.expected_answer_type = enum_from_json<ExpectedAnswerType>(m.at("expected_answer_type"));
      if (m.value("has_multiple_choice_answer", true)) q.multiple_choice_answer = e.multiple_choice_answer;
      std::map<int, const json*> answer_meta;
      for (const auto& am : m.at("answers")) answer_meta[am.at("answer_id").get<int>()] = &am;
      for (const auto& a : e.answers) {
        Answer ans;
        ans.answer_id = a.answer_id;
        ans.text = a.answer;
        ans.confidence = enum_from_json<Confidence>(json(a.answer_confidence));
        if (auto it = answer_meta.find(a.answer_id); it != answer_meta.end()) {
          ans.answer_type = it->second->value("answer_type", "");
          ans.generator_model = it->second->value("generator_model", "");
        }
        q.answers.push_back(std::move(ans));
      }
      items[e.image_id].emplace_back(m.at("index").get<std::size_t>(), std::move(q));
    }
    for (auto& [image_num, list] : items) {
      auto it = records.find(image_num);
      if (it == records.end())
        throw Error(ErrorCode::schema_parse_failure, "questions reference unknown image " + std::to_string(image_num));
      std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      for (auto& [_, q] : list) it->second.qa_items.push_back(std::move(q));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema_parse_failure, std::string("metadata sidecar: ") + e.what());
  }
  std::vector<ImageRecord> out;
  for (auto& [_, r] : records) out.push_back(std::move(r));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.image_id < b.image_id; });
  return out;
}

void write_dataset(std::span<const ImageRecord> records, const std::filesystem::path& out_dir) {
  for (const auto& r : records) require_complete(r);
  const NumericIds ids = assign_numeric_ids(records);
  for (Split split : {Split::train, Split::test, Split::unassigned}) {
    std::vector<ImageRecord> subset;
    std::copy_if(records.begin(), records.end(), std::back_inserter(subset),
                 [&](const ImageRecord& r) { return r.split == split; });
    if (subset.empty()) continue;
    const std::string name(to_string(split));
    write_json_file(out_dir / ("captions_" + name + ".json"), export_coco_captions(subset, ids));
    auto vqa = export_vqa(subset, ids);
    write_json_file(out_dir / ("questions_" + name + ".json"), vqa.questions);
    write_json_file(out_dir / ("annotations_" + name + ".json"), vqa.annotations);
    write_json_file(out_dir / ("metadata_" + name + ".json"), export_metadata(subset, ids));
  }
}

std::vector<ImageRecord> load_dataset(const std::filesystem::path& dir, std::optional<Split> split) {
  std::vector<ImageRecord> out;
  bool found = false;
  for (Split s : {Split::train, Split::test, Split::unassigned}) {
    if (split && *split != s) continue;
    const std::string name(to_string(s));
    const auto captions = dir / ("captions_" + name + ".json");
    if (!std::filesystem::exists(captions)) continue;
    found = true;
    auto part = import_dataset(read_json_file(captions), read_json_file(dir / ("questions_" + name + ".json")),
                               read_json_file(dir / ("annotations_" + name + ".json")),
                               read_json_file(dir / ("metadata_" + name + ".json")));
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  if (!found) throw Error(ErrorCode::io_error, "no dataset files found in " + dir.string());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.image_id < b.image_id; });
  return out;
}

}  // namespace foundry::dataset
