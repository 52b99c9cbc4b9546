#include "foundry/dataset/sampling.h"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "foundry/core/error.h"
#include "foundry/core/rng.h"

namespace foundry::dataset {
namespace {

void require_open_unit(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) throw Error(ErrorCode::invalid_argument, std::string(name) + " must be in (0, 1)");
}

}  // namespace

double z_for_confidence(double confidence) {
  require_open_unit(confidence, "confidence");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + confidence / 2.0);
}

SampleSize cochran_sample_size(std::size_t population, double confidence, double margin, double proportion) {
  if (population == 0) throw Error(ErrorCode::invalid_argument, "population is empty");
  require_open_unit(margin, "margin");
  require_open_unit(proportion, "assumed proportion");
  SampleSize s;
  s.z = z_for_confidence(confidence);
  s.n0 = s.z * s.z * proportion * (1.0 - proportion) / (margin * margin);
  const double n_pop = static_cast<double>(population);
  const double corrected = s.n0 / (1.0 + (s.n0 - 1.0) / n_pop);
  // Guard against 550.0000000001-style ceilings.
  const auto n = static_cast<std::size_t>(std::ceil(corrected - 1e-9));
  s.clamped = n >= population;
  s.n = std::clamp<std::size_t>(n, 1, population);
  return s;
}

ReviewSample sample_for_review(std::span<const std::string> population_ids, double confidence, double margin,
                               double assumed_proportion, std::uint64_t seed) {
  const SampleSize size = cochran_sample_size(population_ids.size(), confidence, margin, assumed_proportion);
  ReviewSample out;
  out.population_size = population_ids.size();
  out.confidence = confidence;
  out.margin = margin;
  out.assumed_proportion = assumed_proportion;
  out.sample_size = size.n;
  out.seed = seed;
  out.n0 = size.n0;
  out.clamped = size.clamped;

  std::vector<std::string> pool(population_ids.begin(), population_ids.end());
  Rng rng(derive_seed(seed, "review-sample"));
  for (std::size_t i = 0; i < size.n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(size.n);
  out.item_ids = std::move(pool);
  return out;
}

nlohmann::json to_json(const ReviewSample& s) {
  return nlohmann::json{{"population_size", s.population_size},
                        {"confidence", s.confidence},
                        {"margin", s.margin},
                        {"assumed_proportion", s.assumed_proportion},
                        {"sample_size", s.sample_size},
                        {"item_ids", s.item_ids},
                        {"seed", s.seed},
                        {"n0", s.n0},
                        {"clamped", s.clamped}};
}

ReviewSample review_sample_from_json(const nlohmann::json& j) {
  ReviewSample s;
  try {
    s.item_ids = j.at("item_ids").get<std::vector<std::string>>();
    s.population_size = j.value("population_size", s.item_ids.size());
    s.confidence = j.value("confidence", 0.95);
    s.margin = j.value("margin", 0.04);
    s.assumed_proportion = j.value("assumed_proportion", 0.5);
    s.sample_size = j.value("sample_size", s.item_ids.size());
    s.seed = j.value("seed", std::uint64_t{0});
    s.n0 = j.value("n0", 0.0);
    s.clamped = j.value("clamped", false);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::schema_parse_failure, std::string("review sample: ") + e.what());
  }
  return s;
}

}  // namespace foundry::dataset
