#include "foundry/dataset/stats.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "foundry/core/text.h"

namespace foundry::dataset {

std::map<std::string, CountShare> to_shares(const std::map<std::string, std::size_t>& counts) {
  std::size_t total = 0;
  for (const auto& [_, n] : counts) total += n;
  std::map<std::string, CountShare> out;
  if (total == 0) {
    for (const auto& [k, n] : counts) out[k] = {n, 0.0};
    return out;
  }
  // Work in tenths of a percent: 1000 units to distribute.
  struct Part {
    std::string key;
    long units;
    double remainder;
  };
  std::vector<Part> parts;
  long assigned = 0;
  for (const auto& [k, n] : counts) {
    const double exact = 1000.0 * static_cast<double>(n) / static_cast<double>(total);
    const long floor_units = static_cast<long>(std::floor(exact));
    parts.push_back({k, floor_units, exact - static_cast<double>(floor_units)});
    assigned += floor_units;
  }
  std::vector<std::size_t> order(parts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return parts[a].remainder > parts[b].remainder; });
  for (std::size_t i = 0; assigned < 1000 && i < order.size(); ++i, ++assigned) ++parts[order[i]].units;
  for (const auto& p : parts) out[p.key] = {counts.at(p.key), static_cast<double>(p.units) / 10.0};
  return out;
}

DatasetStats compute_stats(std::span<const ImageRecord> records) {
  DatasetStats stats;
  struct Sums {
    double question_words = 0, answer_words = 0, caption_words = 0;
  };
  std::map<std::string, Sums> sums;
  std::map<std::string, std::size_t> difficulty, mode, answer_type;
  for (Difficulty d : {Difficulty::easy, Difficulty::medium, Difficulty::hard}) difficulty[std::string(to_string(d))] = 0;
  for (AnswerMode m : {AnswerMode::closed, AnswerMode::open}) mode[std::string(to_string(m))] = 0;
  for (ExpectedAnswerType t : {ExpectedAnswerType::analysis, ExpectedAnswerType::yes_no_multiple_choice,
                               ExpectedAnswerType::recommendation, ExpectedAnswerType::count,
                               ExpectedAnswerType::identification})
    answer_type[std::string(to_string(t))] = 0;

  std::map<std::string, std::vector<int>> attempts;
  for (const auto& r : records) {
    if (r.trace.caption_attempts > 0) attempts["caption"].push_back(r.trace.caption_attempts);
    if (r.trace.question_attempts > 0) attempts["question"].push_back(r.trace.question_attempts);
    for (const auto& [_, n] : r.trace.answer_attempts) attempts["answer"].push_back(n);

    if (r.status != RecordStatus::complete) continue;
    for (const std::string& key : {std::string(to_string(r.split)), std::string("all")}) {
      SplitCounts& c = stats.splits[key];
      Sums& s = sums[key];
      ++c.n_images;
      if (r.caption) {
        ++c.n_captions;
        s.caption_words += static_cast<double>(count_words(r.caption->text));
      }
      for (const auto& q : r.qa_items) {
        ++c.n_questions;
        s.question_words += static_cast<double>(count_words(q.question_text));
        for (const auto& a : q.answers) {
          ++c.n_answers;
          s.answer_words += static_cast<double>(count_words(a.text));
        }
      }
    }
    for (const auto& q : r.qa_items) {
      ++difficulty[std::string(to_string(q.difficulty))];
      ++mode[std::string(to_string(q.answer_mode))];
      ++answer_type[std::string(to_string(q.expected_answer_type))];
    }
  }
  for (auto& [key, c] : stats.splits) {
    const Sums& s = sums[key];
    c.avg_question_len = c.n_questions ? s.question_words / static_cast<double>(c.n_questions) : 0.0;
    c.avg_answer_len = c.n_answers ? s.answer_words / static_cast<double>(c.n_answers) : 0.0;
    c.avg_caption_len = c.n_captions ? s.caption_words / static_cast<double>(c.n_captions) : 0.0;
  }
  stats.difficulty_counts = to_shares(difficulty);
  stats.question_mode_counts = to_shares(mode);
  stats.answer_type_counts = to_shares(answer_type);
  for (const auto& [stage, list] : attempts) {
    double total = 0;
    auto& hist = stats.attempt_histograms[stage];
    for (int n : list) {
      total += n;
      ++hist[n];
    }
    stats.attempt_means[stage] = list.empty() ? 0.0 : total / static_cast<double>(list.size());
  }
  return stats;
}

nlohmann::json to_json(const DatasetStats& s) {
  using nlohmann::json;
  auto shares = [](const std::map<std::string, CountShare>& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[k] = {{"count", v.count}, {"percent", v.percent}};
    return j;
  };
  json splits = json::object();
  for (const auto& [k, c] : s.splits) {
    splits[k] = {{"n_images", c.n_images},
                 {"n_questions", c.n_questions},
                 {"n_answers", c.n_answers},
                 {"n_captions", c.n_captions},
                 {"avg_question_len", c.avg_question_len},
                 {"avg_answer_len", c.avg_answer_len},
                 {"avg_caption_len", c.avg_caption_len}};
  }
  json hist = json::object();
  for (const auto& [stage, h] : s.attempt_histograms) {
    json hj = json::object();
    for (const auto& [n, count] : h) hj[std::to_string(n)] = count;
    hist[stage] = hj;
  }
  return json{{"splits", splits},
              {"difficulty", shares(s.difficulty_counts)},
              {"question_mode", shares(s.question_mode_counts)},
              {"expected_answer_type", shares(s.answer_type_counts)},
              {"attempt_means", s.attempt_means},
              {"attempt_histograms", hist}};
}

}  // namespace foundry::dataset
