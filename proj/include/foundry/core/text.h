#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace foundry {

/// Whitespace-token count; the word definition used by every length statistic.
std::size_t count_words(std::string_view text);

std::vector<std::string> split_whitespace(std::string_view text);

std::string trim(std::string_view text);
std::string to_lower(std::string_view text);

/// Answer canonicalization for matching: lowercase, punctuation stripped,
/// articles (a, an, the) dropped, whitespace collapsed, number words
/// zero..ten mapped to digits.
std::string normalize_answer(std::string_view text);

/// Most frequent normalized answer; ties go to the lexicographically smallest.
/// Empty input yields an empty string.
std::string modal_answer(std::span<const std::string> answers);

}  // namespace foundry
