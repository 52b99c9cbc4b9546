#include "foundry/gateway/backend.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "foundry/core/error.h"
#include "foundry/core/rng.h"
#include "foundry/core/serialize.h"
#include "foundry/providers/http_provider.h"

namespace foundry::gateway {

BackendModel calibrated_backend_model() { return BackendModel{0.55, 0.0, 4.0, 0.0, 0}; }

double simulated_service(const BackendModel& model, std::size_t b, RequestId request_id) {
  if (b < 1) throw Error(ErrorCode::invalid_argument, "in-flight count must be >= 1");
  if (!(model.s0 > 0.0)) throw Error(ErrorCode::invalid_argument, "s0 must be > 0");
  const double capacity = std::max(1.0, model.capacity);
  const double load = std::max(1.0, static_cast<double>(b) / capacity);
  double service = model.s0 * std::pow(load, 1.0 - model.gamma);
  if (model.jitter > 0.0) {
    Rng rng(derive_seed(model.seed, "service/" + std::to_string(request_id)));
    service *= rng.lognormal_unit_mean(model.jitter);
  }
  return service;
}

double SimulatedBackend::execute(const BenchPayload&, RequestId id, std::size_t in_flight) {
  const double service = simulated_service(model_, in_flight, id);
  if (!virtual_) std::this_thread::sleep_for(std::chrono::duration<double>(service));
  return service;
}

HttpBackend::HttpBackend(std::string base_url, std::string path, double timeout_s)
    : base_url_(std::move(base_url)), path_(std::move(path)), timeout_s_(timeout_s) {}

double HttpBackend::execute(const BenchPayload& payload, RequestId, std::size_t) {
  nlohmann::json body{{"prompt", payload.prompt}, {"image", ""}};
  if (!payload.image.empty()) body["image"] = providers::base64_encode(read_text_file(payload.image));

  httplib::Client client(base_url_);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::duration<double>(timeout_s_));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(path_, body.dump(), "application/json");
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (!res) throw Error(ErrorCode::backend_unreachable, base_url_ + ": " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw TransportError(res->status >= 500 ? TransportErrorClass::server_error : TransportErrorClass::client_error,
                         base_url_ + path_ + ": HTTP " + std::to_string(res->status));
  auto reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("text") || !reply["text"].is_string())
    throw Error(ErrorCode::malformed_response, base_url_ + path_ + ": expected {\"text\": ...}");
  return elapsed;
}

}  // namespace foundry::gateway
