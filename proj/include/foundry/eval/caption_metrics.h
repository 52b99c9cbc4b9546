#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace foundry::eval {

/// Lowercase, split on whitespace, strip ASCII punctuation from each token,
/// drop empty tokens.
std::vector<std::string> tokenize_caption(std::string_view text);

inline constexpr double kBleuEpsilon = 1e-9;

/// Sentence BLEU-4: geometric mean of clipped n-gram precisions (n = 1..4)
/// times the brevity penalty against the closest reference length. Zero
/// precisions are replaced by kBleuEpsilon.
double bleu4(std::string_view candidate, std::span<const std::string> references);

/// LCS F-measure with beta = 1.2; best over references.
double rouge_l(std::string_view candidate, std::span<const std::string> references);

/// Exact-match METEOR variant: greedy in-order unigram alignment,
/// Fmean = PR / (alpha P + (1 - alpha) R) with alpha = 0.9, fragmentation
/// penalty 0.5 (chunks / matches)^3; best over references.
double meteor_lite(std::string_view candidate, std::span<const std::string> references);

struct CiderResult {
  std::map<std::string, double> per_image;
  double corpus_mean = 0.0;
};

/// TF-IDF cosine over 1..4-grams with document frequency taken from the
/// reference sets, averaged over references and n, scaled by 10. Throws
/// CorpusTooSmall with fewer than two images.
CiderResult cider(const std::map<std::string, std::string>& candidates,
                  const std::map<std::string, std::vector<std::string>>& references);

}  // namespace foundry::eval
