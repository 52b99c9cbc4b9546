#include "foundry/cli/config.h"

#include <cstdlib>
#include <regex>
#include <set>

#include "foundry/core/error.h"
#include "foundry/core/rng.h"
#include "foundry/core/serialize.h"

namespace foundry::cli {
namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::config_invalid, what); }

std::string expand(const std::string& s) {
  static const std::regex var(R"(\$\{([A-Za-z_][A-Za-z0-9_]*)\})");
  std::string out;
  auto begin = std::sregex_iterator(s.begin(), s.end(), var);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    out += s.substr(last, it->position() - last);
    const char* v = std::getenv((*it)[1].str().c_str());
    out += v ? v : "";
    last = it->position() + it->length();
  }
  return out + s.substr(last);
}

Stage stage_key(const std::string& name) {
  auto s = parse_enum<Stage>(name);
  if (!s) invalid("unknown stage '" + name + "'");
  return *s;
}

providers::StageBehavior parse_behavior(const json& j) {
  providers::StageBehavior b;
  b.validation_pass_probability = j.value("pass_probability", b.validation_pass_probability);
  b.response_templates = j.value("templates", b.response_templates);
  b.inconsistency_rate = j.value("inconsistency_rate", b.inconsistency_rate);
  b.latency.mean_s = j.value("latency_mean_s", b.latency.mean_s);
  b.latency.sigma = j.value("latency_sigma", b.latency.sigma);
  if (b.validation_pass_probability < 0.0 || b.validation_pass_probability > 1.0)
    invalid("pass_probability must be in [0, 1]");
  return b;
}

ProviderConfig parse_provider(const json& j) {
  const std::string type = j.value("type", "simulated");
  const std::string id = j.at("id").get<std::string>();
  if (id.empty()) invalid("provider id must not be empty");
  if (type == "simulated") {
    SimulatedProviderConfig c{id, {}};
    c.script.seed = j.value("seed", std::uint64_t{0});
    c.script.fail_first_calls = j.value("fail_first_calls", 0);
    if (j.contains("stages"))
      for (const auto& [purpose, b] : j["stages"].items()) c.script.stage_behaviors[purpose] = parse_behavior(b);
    return c;
  }
  if (type == "http") {
    providers::HttpProviderConfig c;
    c.id = id;
    c.base_url = j.at("base_url").get<std::string>();
    c.path = j.value("path", c.path);
    c.model = j.value("model", "");
    c.api_key_env = j.value("api_key_env", "");
    c.auth_header = j.value("auth_header", c.auth_header);
    c.timeout_s = j.value("timeout_s", c.timeout_s);
    if (c.base_url.empty()) invalid("provider '" + id + "' needs base_url");
    return c;
  }
  invalid("unknown provider type '" + type + "'");
}

std::string provider_id(const ProviderConfig& p) {
  return std::visit([](const auto& c) { return c.id; }, p);
}

}  // namespace

json interpolate_env(const json& doc) {
  if (doc.is_string()) return expand(doc.get<std::string>());
  if (doc.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : doc.items()) out[k] = interpolate_env(v);
    return out;
  }
  if (doc.is_array()) {
    json out = json::array();
    for (const auto& v : doc) out.push_back(interpolate_env(v));
    return out;
  }
  return doc;
}

RootConfig default_config() {
  RootConfig c;
  SimulatedProviderConfig a{"sim-a", {}}, b{"sim-b", {}}, v{"sim-validator", {}};
  a.script.seed = 1;
  b.script.seed = 2;
  v.script.seed = 3;
  v.script.stage_behaviors["validate_caption"].validation_pass_probability = 0.901;
  v.script.stage_behaviors["validate_question"].validation_pass_probability = 0.827;
  v.script.stage_behaviors["validate_answer"].validation_pass_probability = 0.710;
  c.providers = {a, b, v};
  c.pipeline.providers = {"sim-a", "sim-b"};
  c.pipeline.validator = "sim-validator";
  c.pipeline.parallelism = 4;
  c.judge.provider = "sim-validator";
  return c;
}

RootConfig parse_config(const json& raw) {
  if (!raw.is_object()) invalid("config must be a JSON object");
  const json doc = interpolate_env(raw);
  RootConfig c = default_config();
  try {
    if (doc.contains("paths")) {
      const auto& p = doc["paths"];
      c.paths.records_dir = p.value("records_dir", c.paths.records_dir.string());
      c.paths.output_dir = p.value("output_dir", c.paths.output_dir.string());
      c.paths.prompts_dir = p.value("prompts_dir", c.paths.prompts_dir.string());
    }
    if (doc.contains("providers")) {
      c.providers.clear();
      for (const auto& p : doc["providers"]) c.providers.push_back(parse_provider(p));
    }
    if (doc.contains("pipeline")) {
      const auto& p = doc["pipeline"];
      c.pipeline.providers = p.value("providers", c.pipeline.providers);
      c.pipeline.validator = p.value("validator", c.pipeline.validator);
      c.pipeline.parallelism = p.value("parallelism", c.pipeline.parallelism);
      c.pipeline.seed = p.value("seed", c.pipeline.seed);
      if (p.contains("temperatures"))
        for (const auto& [k, v] : p["temperatures"].items()) c.pipeline.agent_temperatures[stage_key(k)] = v.get<double>();
      if (p.contains("max_attempts"))
        for (const auto& [k, v] : p["max_attempts"].items()) c.pipeline.max_attempts[stage_key(k)] = v.get<int>();
    }
    if (doc.contains("retry")) {
      const auto& r = doc["retry"];
      c.retry.max_retries = r.value("max_retries", c.retry.max_retries);
      c.retry.base_backoff = providers::Seconds(r.value("base_backoff_s", c.retry.base_backoff.count()));
      c.retry.backoff_multiplier = r.value("multiplier", c.retry.backoff_multiplier);
    }
    if (doc.contains("judge")) {
      const auto& j = doc["judge"];
      c.judge.provider = j.value("provider", c.judge.provider);
      c.judge.repetitions = j.value("repetitions", c.judge.repetitions);
      c.judge.temperature = j.value("temperature", c.judge.temperature);
      c.judge.concurrency = j.value("concurrency", c.judge.concurrency);
    }
    if (doc.contains("gateway")) {
      const auto& g = doc["gateway"];
      c.gateway.timeout_s = g.value("timeout_s", c.gateway.timeout_s);
      if (g.contains("backend")) {
        const auto& b = g["backend"];
        const std::string type = b.value("type", "simulated");
        if (type == "simulated") {
          auto m = gateway::calibrated_backend_model();
          m.s0 = b.value("s0", m.s0);
          m.gamma = b.value("gamma", m.gamma);
          m.capacity = b.value("capacity", m.capacity);
          m.jitter = b.value("jitter", m.jitter);
          m.seed = b.value("seed", m.seed);
          c.gateway.backend = m;
        } else if (type == "http") {
          HttpBackendConfig h;
          h.base_url = b.at("base_url").get<std::string>();
          h.path = b.value("path", h.path);
          h.timeout_s = b.value("timeout_s", h.timeout_s);
          c.gateway.backend = h;
        } else {
          invalid("unknown gateway backend type '" + type + "'");
        }
      }
    }
    if (doc.contains("review")) {
      const auto& r = doc["review"];
      c.review.reject_policy = review::parse_reject_policy(r.value("reject_policy", "regenerate"));
      if (r.contains("log_path")) c.review.log_path = r["log_path"].get<std::string>();
      c.review.host = r.value("host", c.review.host);
      c.review.port = r.value("port", c.review.port);
    }
    c.train_ratio = doc.value("train_ratio", c.train_ratio);
  } catch (const json::exception& e) {
    invalid(std::string("config: ") + e.what());
  }

  std::set<std::string> ids;
  for (const auto& p : c.providers)
    if (!ids.insert(provider_id(p)).second) invalid("duplicate provider id '" + provider_id(p) + "'");
  if (c.judge.repetitions < 1) invalid("judge.repetitions must be >= 1");
  if (!(c.gateway.timeout_s > 0.0)) invalid("gateway.timeout_s must be > 0");
  if (!(c.train_ratio > 0.0 && c.train_ratio < 1.0)) invalid("train_ratio must be in (0, 1)");
  if (auto* m = std::get_if<gateway::BackendModel>(&c.gateway.backend); m && !(m->s0 > 0.0))
    invalid("gateway backend s0 must be > 0");
  return c;
}

RootConfig load_config(const std::filesystem::path& file) {
  if (!std::filesystem::is_regular_file(file)) invalid("config file not found: " + file.string());
  json doc;
  try {
    doc = read_json_file(file);
  } catch (const std::exception& e) {
    invalid("cannot read config " + file.string() + ": " + e.what());
  }
  return parse_config(doc);
}

providers::ProviderRegistry build_registry(const RootConfig& config, std::optional<std::uint64_t> seed_override) {
  providers::ProviderRegistry registry;
  for (const auto& p : config.providers) {
    if (const auto* sim = std::get_if<SimulatedProviderConfig>(&p)) {
      auto script = sim->script;
      if (seed_override) script.seed = derive_seed(*seed_override, sim->id);
      registry.add(std::make_shared<providers::SimulatedProvider>(sim->id, std::move(script)));
    } else {
      registry.add(std::make_shared<providers::HttpVisionProvider>(std::get<providers::HttpProviderConfig>(p)));
    }
  }
  return registry;
}

}  // namespace foundry::cli
