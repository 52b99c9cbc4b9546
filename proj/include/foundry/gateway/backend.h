#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "foundry/gateway/scheduler.h"

namespace foundry::gateway {

/// Desk-scale stand-in for a continuous-batching server. A request started
/// with b requests in flight takes s0 * max(1, b/capacity)^(1-gamma) seconds,
/// times a unit-mean lognormal jitter.
struct BackendModel {
  double s0 = 0.55;
  double gamma = 0.0;
  double capacity = 4.0;
  double jitter = 0.0;
  std::uint64_t seed = 0;
};

/// The shipped calibration.
BackendModel calibrated_backend_model();

/// Deterministic in (model, b, request_id). Throws InvalidArgument for b < 1
/// or s0 <= 0.
double simulated_service(const BackendModel& model, std::size_t b, RequestId request_id);

struct BenchPayload {
  std::string prompt;
  std::filesystem::path image;  // may be empty
};

/// Executes one request and returns its service time in seconds. Must be
/// callable from several threads at once.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual double execute(const BenchPayload& payload, RequestId id, std::size_t in_flight) = 0;
  /// True when execute() returns a modelled duration without waiting.
  virtual bool is_virtual() const { return false; }
};

class SimulatedBackend : public Backend {
 public:
  SimulatedBackend(BackendModel model, bool virtual_time) : model_(model), virtual_(virtual_time) {}
  double execute(const BenchPayload& payload, RequestId id, std::size_t in_flight) override;
  bool is_virtual() const override { return virtual_; }
  const BackendModel& model() const { return model_; }

 private:
  BackendModel model_;
  bool virtual_;
};

/// POSTs {"prompt", "image"} (image as base64) and expects {"text"}.
/// Connection failures throw BackendUnreachable.
class HttpBackend : public Backend {
 public:
  HttpBackend(std::string base_url, std::string path, double timeout_s);
  double execute(const BenchPayload& payload, RequestId id, std::size_t in_flight) override;

 private:
  std::string base_url_;
  std::string path_;
  double timeout_s_;
};

}  // namespace foundry::gateway
