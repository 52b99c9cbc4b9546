#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace foundry::dataset {

struct ReviewSample {
  std::size_t population_size = 0;
  double confidence = 0.95;
  double margin = 0.04;
  double assumed_proportion = 0.5;
  std::size_t sample_size = 0;
  std::vector<std::string> item_ids;
  std::uint64_t seed = 0;
  double n0 = 0.0;       // infinite-population requirement
  bool clamped = false;  // requirement reached the whole population

  friend bool operator==(const ReviewSample&, const ReviewSample&) = default;
};

struct SampleSize {
  double z = 0.0;
  double n0 = 0.0;
  std::size_t n = 0;
  bool clamped = false;
};

/// Two-sided standard normal critical value for a confidence level.
double z_for_confidence(double confidence);

/// Cochran's n0 = z^2 p(1-p) / e^2 with the finite-population correction
/// n = ceil(n0 / (1 + (n0 - 1) / N)), capped at N.
SampleSize cochran_sample_size(std::size_t population, double confidence, double margin, double proportion);

/// Draws the sample without replacement (seeded partial Fisher-Yates).
/// Throws InvalidArgument for an empty population or parameters outside (0,1).
ReviewSample sample_for_review(std::span<const std::string> population_ids, double confidence, double margin,
                               double assumed_proportion, std::uint64_t seed);

nlohmann::json to_json(const ReviewSample& s);
ReviewSample review_sample_from_json(const nlohmann::json& j);

}  // namespace foundry::dataset
