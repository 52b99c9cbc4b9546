#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "foundry/gateway/backend.h"
#include "foundry/gateway/report.h"
#include "foundry/gateway/scheduler.h"

namespace foundry::gateway {

struct StreamSpec {
  int streams = 4;
  double hz = 30.0;
  double duration_s = 60.0;
};

struct Arrival {
  int stream_id = 0;
  double time = 0.0;
};

/// Stream s emits frame k at s / (streams * hz) + k / hz for every time
/// below duration. Sorted by time. Throws InvalidArgument unless hz > 0.
std::vector<Arrival> arrival_schedule(const StreamSpec& spec);

/// One request at a time, in image order. With a virtual backend the clock
/// advances by the modelled service time instead of sleeping.
BenchReport run_sequential_bench(std::span<const std::filesystem::path> images, const std::string& prompt,
                                 Backend& backend);

struct ContinuousOptions {
  StreamSpec streams;
  GatewayConfig gateway;
  bool virtual_time = true;
  std::string prompt = "Describe the driving scene.";
  std::vector<std::filesystem::path> frames;  // cycled; may be empty
};

/// Replays the streams through a Scheduler. Virtual time needs a virtual
/// backend; events at equal times run completions, then arrivals, then
/// timeouts. After the last arrival the loop drains until nothing is queued or
/// in flight.
BenchReport run_continuous_bench(const ContinuousOptions& options, Backend& backend);

std::vector<BenchReport> run_sweep(const ContinuousOptions& options, std::span<const int> caps, Backend& backend);

struct CapacityFit {
  double gamma = 0.0;
  double loss = 0.0;
};

/// Grid search of gamma over [0, 1] minimizing squared relative error between
/// the mean service time at each cap and its target.
CapacityFit fit_capacity_exponent(const BackendModel& base, const ContinuousOptions& options,
                                  std::span<const std::pair<int, double>> targets, double step = 0.01);

}  // namespace foundry::gateway
