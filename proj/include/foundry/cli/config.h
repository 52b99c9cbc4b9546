#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "foundry/core/types.h"
#include "foundry/eval/judge.h"
#include "foundry/gateway/backend.h"
#include "foundry/providers/http_provider.h"
#include "foundry/providers/provider.h"
#include "foundry/providers/simulated.h"
#include "foundry/review/review_state.h"

namespace foundry::cli {

struct PathsConfig {
  std::filesystem::path records_dir = "records";
  std::filesystem::path output_dir = "out";
  std::filesystem::path prompts_dir = "prompts";
};

struct SimulatedProviderConfig {
  std::string id;
  providers::SimulatedProviderScript script;
};

using ProviderConfig = std::variant<SimulatedProviderConfig, providers::HttpProviderConfig>;

struct HttpBackendConfig {
  std::string base_url;
  std::string path = "/generate";
  double timeout_s = 30.0;
};

struct GatewaySection {
  double timeout_s = 10.0;
  std::variant<gateway::BackendModel, HttpBackendConfig> backend = gateway::calibrated_backend_model();
};

struct ReviewSection {
  review::RejectPolicy reject_policy = review::RejectPolicy::regenerate;
  std::optional<std::filesystem::path> log_path;
  std::string host = "127.0.0.1";
  int port = 8080;
};

struct RootConfig {
  PathsConfig paths;
  std::vector<ProviderConfig> providers;
  PipelineConfig pipeline;
  providers::RetryPolicy retry;
  eval::JudgeConfig judge;
  GatewaySection gateway;
  ReviewSection review;
  double train_ratio = 0.9;
};

/// Replaces ${NAME} with the environment value (empty when unset) in every
/// string of the document.
nlohmann::json interpolate_env(const nlohmann::json& doc);

/// Three simulated providers: two generators and a separate validator/judge.
RootConfig default_config();

/// Overlays `doc` on default_config(). Throws ConfigInvalid on bad values.
RootConfig parse_config(const nlohmann::json& doc);

/// Throws ConfigInvalid when the file is missing or unreadable.
RootConfig load_config(const std::filesystem::path& file);

/// Instantiates every configured provider. Credentials are only read when a
/// provider is called.
providers::ProviderRegistry build_registry(const RootConfig& config, std::optional<std::uint64_t> seed_override);

}  // namespace foundry::cli
