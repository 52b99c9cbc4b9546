#pragma once

#include <string>
#include <vector>

#include "foundry/core/types.h"

namespace foundry {

struct StructuralViolation {
  std::string field;    // dotted path, e.g. "qa_items[img_q2].answers"
  std::string message;  // which invariant broke

  friend bool operator==(const StructuralViolation&, const StructuralViolation&) = default;
};

/// Checks every record-level invariant. Completeness invariants (five items,
/// ten answers, non-empty caption) apply only when status == complete.
std::vector<StructuralViolation> validate_record(const ImageRecord& record);

}  // namespace foundry
