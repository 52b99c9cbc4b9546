#pragma once

#include <string>

#include "foundry/providers/provider.h"

namespace foundry::providers {

struct HttpProviderConfig {
  std::string id;
  std::string base_url;                        // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key_env;                     // empty: no credential sent
  std::string auth_header = "Authorization";   // "Authorization" sends "Bearer <key>"
  double timeout_s = 60.0;
};

/// Chat-completion style client. The image (if any) is sent inline as a
/// base64 data URL inside the user message.
class HttpVisionProvider final : public VisionProvider {
 public:
  explicit HttpVisionProvider(HttpProviderConfig config);

  const std::string& id() const override { return config_.id; }
  ProviderResponse complete(const VisionPrompt& prompt) override;

  const HttpProviderConfig& config() const { return config_; }

 private:
  HttpProviderConfig config_;
};

nlohmann::json build_chat_request(const HttpProviderConfig& config, const VisionPrompt& prompt);
ProviderResponse parse_chat_response(const std::string& body, const std::string& fallback_model);

/// MIME type from a file extension (image/jpeg when unknown).
std::string image_mime_type(const std::string& path);
std::string base64_encode(const std::string& bytes);

}  // namespace foundry::providers
