#pragma once

#include <span>
#include <string>
#include <string_view>

#include "foundry/core/text.h"

namespace foundry::eval {

using foundry::normalize_answer;

/// Consensus accuracy min(matches / 3, 1) over normalized answers.
double vqa_accuracy(std::string_view candidate, std::span<const std::string> gt_answers);

/// 1 when the normalized candidate equals the modal ground-truth answer.
double vqa_exact_match(std::string_view candidate, std::span<const std::string> gt_answers);

}  // namespace foundry::eval
