#include "foundry/eval/caption_metrics.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "foundry/core/error.h"
#include "foundry/core/text.h"

namespace foundry::eval {
namespace {

using Tokens = std::vector<std::string>;
using NgramCounts = std::map<std::string, int>;

NgramCounts ngrams(const Tokens& tokens, std::size_t n) {
  NgramCounts out;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < n; ++k) key += ' ' + tokens[i + k];
    ++out[key];
  }
  return out;
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double meteor_single(const Tokens& cand, const Tokens& ref) {
  constexpr double kAlpha = 0.9, kGamma = 0.5, kTheta = 3.0;
  std::vector<bool> used(ref.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> alignment;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    for (std::size_t j = 0; j < ref.size(); ++j) {
      if (!used[j] && ref[j] == cand[i]) {
        used[j] = true;
        alignment.emplace_back(i, j);
        break;
      }
    }
  }
  const auto m = static_cast<double>(alignment.size());
  if (m == 0.0) return 0.0;
  std::size_t chunks = 0;
  for (std::size_t k = 0; k < alignment.size(); ++k) {
    const bool continues = k > 0 && alignment[k].first == alignment[k - 1].first + 1 &&
                           alignment[k].second == alignment[k - 1].second + 1;
    if (!continues) ++chunks;
  }
  const double precision = m / static_cast<double>(cand.size());
  const double recall = m / static_cast<double>(ref.size());
  const double fmean = precision * recall / (kAlpha * precision + (1.0 - kAlpha) * recall);
  const double penalty = kGamma * std::pow(static_cast<double>(chunks) / m, kTheta);
  return fmean * (1.0 - penalty);
}

}  // namespace

std::vector<std::string> tokenize_caption(std::string_view text) {
  std::vector<std::string> out;
  for (auto& word : split_whitespace(to_lower(text))) {
    std::string clean;
    for (char c : word)
      if (!std::ispunct(static_cast<unsigned char>(c))) clean.push_back(c);
    if (!clean.empty()) out.push_back(std::move(clean));
  }
  return out;
}

double bleu4(std::string_view candidate, std::span<const std::string> references) {
  const Tokens cand = tokenize_caption(candidate);
  if (cand.empty() || references.empty()) return 0.0;
  std::vector<Tokens> refs;
  for (const auto& r : references) refs.push_back(tokenize_caption(r));

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const NgramCounts cand_counts = ngrams(cand, n);
    NgramCounts max_ref;
    for (const auto& r : refs)
      for (const auto& [g, c] : ngrams(r, n)) max_ref[g] = std::max(max_ref[g], c);
    int clipped = 0, total = 0;
    for (const auto& [g, c] : cand_counts) {
      total += c;
      auto it = max_ref.find(g);
      if (it != max_ref.end()) clipped += std::min(c, it->second);
    }
    const double p = (total > 0 && clipped > 0) ? static_cast<double>(clipped) / total : kBleuEpsilon;
    log_sum += std::log(p);
  }

  std::size_t closest = refs.front().size();
  for (const auto& r : refs) {
    const auto d = [&](std::size_t len) { return len > cand.size() ? len - cand.size() : cand.size() - len; };
    if (d(r.size()) < d(closest) || (d(r.size()) == d(closest) && r.size() < closest)) closest = r.size();
  }
  const double c = static_cast<double>(cand.size());
  const double bp = cand.size() > closest ? 1.0 : std::exp(1.0 - static_cast<double>(closest) / c);
  return bp * std::exp(log_sum / 4.0);
}

double rouge_l(std::string_view candidate, std::span<const std::string> references) {
  constexpr double kBeta2 = 1.2 * 1.2;
  const Tokens cand = tokenize_caption(candidate);
  double best = 0.0;
  for (const auto& r : references) {
    const Tokens ref = tokenize_caption(r);
    const std::size_t lcs = lcs_length(cand, ref);
    if (lcs == 0) continue;
    const double p = static_cast<double>(lcs) / static_cast<double>(cand.size());
    const double rec = static_cast<double>(lcs) / static_cast<double>(ref.size());
    best = std::max(best, (1.0 + kBeta2) * p * rec / (rec + kBeta2 * p));
  }
  return best;
}

double meteor_lite(std::string_view candidate, std::span<const std::string> references) {
  const Tokens cand = tokenize_caption(candidate);
  double best = 0.0;
  for (const auto& r : references) best = std::max(best, meteor_single(cand, tokenize_caption(r)));
  return best;
}

CiderResult cider(const std::map<std::string, std::string>& candidates,
                  const std::map<std::string, std::vector<std::string>>& references) {
  if (references.size() < 2) throw Error(ErrorCode::corpus_too_small, "CIDEr needs at least two images");
  constexpr std::size_t kMaxN = 4;

  // Document frequency: number of images whose reference set contains the n-gram.
  std::map<std::string, int> df;
  std::map<std::string, std::vector<std::vector<NgramCounts>>> ref_grams;  // image -> ref -> n-1 -> counts
  for (const auto& [image, refs] : references) {
    std::set<std::string> seen;
    auto& per_ref = ref_grams[image];
    for (const auto& r : refs) {
      const Tokens t = tokenize_caption(r);
      std::vector<NgramCounts> by_n;
      for (std::size_t n = 1; n <= kMaxN; ++n) {
        by_n.push_back(ngrams(t, n));
        for (const auto& [g, _] : by_n.back()) seen.insert(g);
      }
      per_ref.push_back(std::move(by_n));
    }
    for (const auto& g : seen) ++df[g];
  }
  const double log_n = std::log(static_cast<double>(references.size()));

  auto weights = [&](const NgramCounts& counts, double& norm) {
    std::map<std::string, double> w;
    norm = 0.0;
    for (const auto& [g, tf] : counts) {
      auto it = df.find(g);
      const double idf = log_n - std::log(std::max(1.0, it == df.end() ? 0.0 : static_cast<double>(it->second)));
      const double v = tf * idf;
      w[g] = v;
      norm += v * v;
    }
    norm = std::sqrt(norm);
    return w;
  };

  CiderResult result;
  double total = 0.0;
  for (const auto& [image, refs] : ref_grams) {
    auto cit = candidates.find(image);
    if (cit == candidates.end()) throw Error(ErrorCode::id_mismatch, "no candidate caption for image " + image);
    const Tokens cand = tokenize_caption(cit->second);
    double score = 0.0;
    for (std::size_t n = 1; n <= kMaxN; ++n) {
      double cand_norm = 0.0;
      const auto cand_w = weights(ngrams(cand, n), cand_norm);
      for (const auto& ref : refs) {
        double ref_norm = 0.0;
        const auto ref_w = weights(ref[n - 1], ref_norm);
        if (cand_norm == 0.0 || ref_norm == 0.0) continue;
        double dot = 0.0;
        for (const auto& [g, v] : cand_w) {
          auto it = ref_w.find(g);
          if (it != ref_w.end()) dot += v * it->second;
        }
        score += dot / (cand_norm * ref_norm);
      }
    }
    const double value = refs.empty() ? 0.0 : 10.0 * score / (static_cast<double>(kMaxN) * refs.size());
    result.per_image[image] = value;
    total += value;
  }
  result.corpus_mean = total / static_cast<double>(ref_grams.size());
  return result;
}

}  // namespace foundry::eval
