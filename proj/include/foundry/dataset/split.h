#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "foundry/core/types.h"

namespace foundry::dataset {

struct SplitResult {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

/// Image-level split: ids are sorted, shuffled with `seed`, and the first
/// floor(n * ratio) go to train; the remainder to test. Throws
/// InvalidArgument unless 0 < ratio < 1.
SplitResult split_dataset(std::span<const std::string> image_ids, double ratio, std::uint64_t seed);

/// Convenience over records; also writes the split into each record.
SplitResult split_records(std::vector<ImageRecord>& records, double ratio, std::uint64_t seed);

}  // namespace foundry::dataset
