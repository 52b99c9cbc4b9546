#pragma once

#include <string_view>

#include <json.hpp>

namespace foundry::cli {

enum class LogLevel { debug, info, warn, error };

void set_log_level(LogLevel level);
LogLevel parse_log_level(std::string_view s);

/// One JSON object per line on stderr: {"ts", "level", "event", ...fields}.
void log(LogLevel level, std::string_view event, const nlohmann::json& fields = nlohmann::json::object());

inline void log_info(std::string_view event, const nlohmann::json& fields = nlohmann::json::object()) {
  log(LogLevel::info, event, fields);
}

}  // namespace foundry::cli
