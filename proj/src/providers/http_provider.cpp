#include "foundry/providers/http_provider.h"

#include <chrono>
#include <cstdlib>

#include <httplib.h>

#include "foundry/core/serialize.h"
#include "foundry/core/text.h"

namespace foundry::providers {

using nlohmann::json;

std::string image_mime_type(const std::string& path) {
  const std::string ext = to_lower(std::filesystem::path(path).extension().string());
  if (ext == ".png") return "image/png";
  if (ext == ".webp") return "image/webp";
  if (ext == ".gif") return "image/gif";
  return "image/jpeg";
}

std::string base64_encode(const std::string& bytes) { return httplib::detail::base64_encode(bytes); }

json build_chat_request(const HttpProviderConfig& config, const VisionPrompt& prompt) {
  std::string system = prompt.system_text;
  if (prompt.response_schema_hint) {
    system += "\n\nRespond only with JSON matching this structure:\n" + *prompt.response_schema_hint;
  }
  json user_content = json::array({json{{"type", "text"}, {"text", prompt.user_text}}});
  if (prompt.image_path) {
    const std::string data = read_text_file(*prompt.image_path);
    user_content.push_back(
        {{"type", "image_url"},
         {"image_url", {{"url", "data:" + image_mime_type(*prompt.image_path) + ";base64," + base64_encode(data)}}}});
  }
  return json{{"model", config.model},
              {"temperature", prompt.temperature},
              {"max_tokens", prompt.max_output_tokens},
              {"messages", json::array({json{{"role", "system"}, {"content", system}},
                                        json{{"role", "user"}, {"content", user_content}}})}};
}

ProviderResponse parse_chat_response(const std::string& body, const std::string& fallback_model) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::malformed_response, std::string("response is not JSON: ") + e.what());
  }
  ProviderResponse out;
  try {
    const json& content = doc.at("choices").at(0).at("message").at("content");
    if (content.is_string()) {
      out.text = content.get<std::string>();
    } else if (content.is_array()) {
      for (const auto& part : content) out.text += part.value("text", "");
    } else {
      throw Error(ErrorCode::malformed_response, "message.content has unexpected type");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::malformed_response, std::string("missing choices[0].message.content: ") + e.what());
  }
  out.model = doc.value("model", fallback_model);
  if (auto it = doc.find("usage"); it != doc.end() && it->is_object()) {
    out.token_usage = TokenUsage{it->value("prompt_tokens", 0), it->value("completion_tokens", 0)};
  }
  return out;
}

HttpVisionProvider::HttpVisionProvider(HttpProviderConfig config) : config_(std::move(config)) {}

ProviderResponse HttpVisionProvider::complete(const VisionPrompt& prompt) {
  std::string key;
  if (!config_.api_key_env.empty()) {
    const char* v = std::getenv(config_.api_key_env.c_str());
    if (v == nullptr || *v == '\0')
      throw Error(ErrorCode::credential_missing, config_.id + ": environment variable " + config_.api_key_env + " is not set");
    key = v;
  }

  httplib::Client client(config_.base_url);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::duration<double>(config_.timeout_s));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (!key.empty()) {
    headers.emplace(config_.auth_header, config_.auth_header == "Authorization" ? "Bearer " + key : key);
  }
  const std::string body = build_chat_request(config_, prompt).dump();

  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(config_.path, headers, body, "application/json");
  const Seconds latency = std::chrono::steady_clock::now() - started;

  if (!res) {
    const auto err = res.error();
    const auto cls = (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout)
                         ? TransportErrorClass::timeout
                         : TransportErrorClass::connection;
    throw TransportError(cls, config_.id + ": " + httplib::to_string(err));
  }
  if (res->status == 429) throw TransportError(TransportErrorClass::rate_limited, config_.id + ": HTTP 429");
  if (res->status >= 500) {
    throw TransportError(TransportErrorClass::server_error, config_.id + ": HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw TransportError(TransportErrorClass::client_error,
                         config_.id + ": HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  }
  ProviderResponse out = parse_chat_response(res->body, config_.model);
  out.latency = latency;
  return out;
}

}  // namespace foundry::providers
