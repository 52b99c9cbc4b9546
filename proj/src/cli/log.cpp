#include "foundry/cli/log.h"

#include <atomic>
#include <chrono>
#include <iostream>
#include <mutex>

#include "foundry/core/error.h"

namespace foundry::cli {
namespace {

std::atomic<LogLevel> g_level{LogLevel::info};
std::mutex g_mu;

const char* name(LogLevel l) {
  switch (l) {
    case LogLevel::debug: return "debug";
    case LogLevel::info: return "info";
    case LogLevel::warn: return "warn";
    case LogLevel::error: return "error";
  }
  return "info";
}

}  // namespace

void set_log_level(LogLevel level) { g_level = level; }

LogLevel parse_log_level(std::string_view s) {
  if (s == "debug") return LogLevel::debug;
  if (s == "info") return LogLevel::info;
  if (s == "warn") return LogLevel::warn;
  if (s == "error") return LogLevel::error;
  throw Error(ErrorCode::config_invalid, "unknown log level '" + std::string(s) + "'");
}

void log(LogLevel level, std::string_view event, const nlohmann::json& fields) {
  if (level < g_level.load()) return;
  nlohmann::json line{{"ts", std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count()},
                      {"level", name(level)},
                      {"event", event}};
  if (fields.is_object())
    for (const auto& [k, v] : fields.items()) line[k] = v;
  std::lock_guard lock(g_mu);
  std::cerr << line.dump() << '\n';
}

}  // namespace foundry::cli
