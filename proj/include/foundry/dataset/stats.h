#pragma once

#include <map>
#include <span>
#include <string>

#include <json.hpp>

#include "foundry/core/types.h"

namespace foundry::dataset {

struct CountShare {
  std::size_t count = 0;
  double percent = 0.0;  // one decimal

  friend bool operator==(const CountShare&, const CountShare&) = default;
};

struct SplitCounts {
  std::size_t n_images = 0;
  std::size_t n_questions = 0;
  std::size_t n_answers = 0;
  std::size_t n_captions = 0;
  double avg_question_len = 0.0;
  double avg_answer_len = 0.0;
  double avg_caption_len = 0.0;

  friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

/// Table-style dataset summary. Content statistics cover complete records;
/// attempt statistics cover every record's trace (failed ones included).
struct DatasetStats {
  std::map<std::string, SplitCounts> splits;  // "train", "test", "unassigned", "all"
  std::map<std::string, CountShare> difficulty_counts;
  std::map<std::string, CountShare> question_mode_counts;
  std::map<std::string, CountShare> answer_type_counts;  // expected answer type per question
  std::map<std::string, double> attempt_means;           // stage -> attempts per item
  std::map<std::string, std::map<int, std::size_t>> attempt_histograms;

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

DatasetStats compute_stats(std::span<const ImageRecord> records);

/// Largest-remainder rounding of counts to percentages with one decimal, so
/// the shares sum to exactly 100.0 (all zeros when the total is zero).
std::map<std::string, CountShare> to_shares(const std::map<std::string, std::size_t>& counts);

nlohmann::json to_json(const DatasetStats& stats);

}  // namespace foundry::dataset
