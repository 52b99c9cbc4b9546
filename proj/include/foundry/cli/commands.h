#pragma once

#include <string>
#include <vector>

namespace foundry::cli {

/// Exit codes: 0 success, 1 runtime or config failure, 2 usage error.
/// Failures print one JSON error line ({"level":"error","error":<Code>,...})
/// on stderr.
int dispatch(const std::vector<std::string>& args);

}  // namespace foundry::cli
