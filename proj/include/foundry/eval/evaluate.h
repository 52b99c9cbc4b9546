#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "foundry/core/types.h"
#include "foundry/eval/judge.h"

namespace foundry::eval {

/// One model output. Exactly one of question_id / image_id is set; image
/// predictions are captions.
struct Prediction {
  std::optional<std::string> question_id;
  std::optional<std::string> image_id;
  std::string text;
};

/// Parses a JSON array of {question_id | image_id, text}. Integer ids are
/// accepted and resolved against the dataset's numeric ids.
std::vector<Prediction> parse_predictions(const nlohmann::json& doc, std::span<const ImageRecord> records);

struct ItemResult {
  std::string id;
  std::string kind;  // closed | open | caption
  std::map<std::string, double> metrics;
  std::optional<RubricScores> rubric;
  std::optional<std::string> error;
};

struct EvalReport {
  std::optional<double> closed_accuracy;
  std::optional<double> closed_exact_match;
  std::map<std::string, double> caption_metrics;
  std::optional<RubricScores> rubric_means;
  int n_closed = 0;
  int n_open = 0;
  int n_open_judged = 0;
  int n_unparsable = 0;
  int n_captions = 0;
  std::vector<ItemResult> items;  // sorted by id
};

struct EvalOptions {
  bool judge = false;
  JudgeContext judge_ctx;
};

/// Throws IdMismatch when a prediction names an unknown or duplicate id.
EvalReport evaluate_dataset(std::span<const ImageRecord> records, std::span<const Prediction> predictions,
                            const EvalOptions& options);

nlohmann::json to_json(const EvalReport& report);

}  // namespace foundry::eval
