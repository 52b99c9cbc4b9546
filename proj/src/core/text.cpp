#include "foundry/core/text.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <utility>

namespace foundry {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

constexpr std::array<std::pair<std::string_view, std::string_view>, 11> kNumberWords{{
    {"zero", "0"}, {"one", "1"}, {"two", "2"}, {"three", "3"}, {"four", "4"}, {"five", "5"},
    {"six", "6"}, {"seven", "7"}, {"eight", "8"}, {"nine", "9"}, {"ten", "10"}}};

}  // namespace

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::size_t count_words(std::string_view text) { return split_whitespace(text).size(); }

std::string trim(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && is_space(text[b])) ++b;
  while (e > b && is_space(text[e - 1])) --e;
  return std::string(text.substr(b, e - b));
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string normalize_answer(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : to_lower(text)) {
    // Apostrophes join ("driver's" -> "drivers"); other punctuation separates.
    if (c == '\'') continue;
    cleaned.push_back(std::ispunct(static_cast<unsigned char>(c)) ? ' ' : c);
  }
  std::string out;
  for (auto& word : split_whitespace(cleaned)) {
    if (word == "a" || word == "an" || word == "the") continue;
    for (const auto& [name, digit] : kNumberWords) {
      if (word == name) {
        word = digit;
        break;
      }
    }
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

std::string modal_answer(std::span<const std::string> answers) {
  std::map<std::string, int> counts;
  for (const auto& a : answers) ++counts[normalize_answer(a)];
  std::string best;
  int best_count = 0;
  // std::map iterates in lexicographic order, so strict > keeps the smallest on ties.
  for (const auto& [text, n] : counts) {
    if (n > best_count) {
      best = text;
      best_count = n;
    }
  }
  return best;
}

}  // namespace foundry
