#include "foundry/eval/vqa.h"

#include <algorithm>

namespace foundry::eval {

double vqa_accuracy(std::string_view candidate, std::span<const std::string> gt_answers) {
  const std::string c = normalize_answer(candidate);
  const auto matches = std::count_if(gt_answers.begin(), gt_answers.end(),
                                     [&](const std::string& a) { return normalize_answer(a) == c; });
  return std::min(static_cast<double>(matches) / 3.0, 1.0);
}

double vqa_exact_match(std::string_view candidate, std::span<const std::string> gt_answers) {
  if (gt_answers.empty()) return 0.0;
  return normalize_answer(candidate) == modal_answer(gt_answers) ? 1.0 : 0.0;
}

}  // namespace foundry::eval
