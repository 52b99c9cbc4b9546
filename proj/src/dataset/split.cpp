#include "foundry/dataset/split.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "foundry/core/error.h"
#include "foundry/core/rng.h"

namespace foundry::dataset {

SplitResult split_dataset(std::span<const std::string> image_ids, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::invalid_argument, "split ratio must be in (0, 1)");
  std::vector<std::string> ids(image_ids.begin(), image_ids.end());
  std::sort(ids.begin(), ids.end());
  Rng rng(derive_seed(seed, "split"));
  for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);

  // The epsilon absorbs products like 10 * 0.9 landing just under an integer.
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(ids.size()) * ratio + 1e-9));
  SplitResult out;
  out.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  return out;
}

SplitResult split_records(std::vector<ImageRecord>& records, double ratio, std::uint64_t seed) {
  std::vector<std::string> ids;
  for (const auto& r : records) ids.push_back(r.image_id);
  SplitResult result = split_dataset(ids, ratio, seed);
  const std::set<std::string> train(result.train.begin(), result.train.end());
  for (auto& r : records) r.split = train.count(r.image_id) ? Split::train : Split::test;
  return result;
}

}  // namespace foundry::dataset
