#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "foundry/gateway/scheduler.h"

namespace foundry::gateway {

struct Summary {
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;  // population
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;

  friend bool operator==(const Summary&, const Summary&) = default;
};

/// Nearest-rank percentile of sorted values (p in (0, 100]).
double nearest_rank(std::span<const double> sorted, double p);

/// Order-independent: values are sorted before any arithmetic. nullopt when
/// empty.
std::optional<Summary> summarize(std::vector<double> values);

struct BenchAggregates {
  std::size_t emitted = 0;
  std::size_t completed = 0;
  std::size_t timed_out_in_queue = 0;
  std::size_t timed_out_in_service = 0;
  std::size_t pending = 0;
  std::optional<Summary> response;  // end - arrival, completed requests
  std::optional<Summary> service;   // end - start, completed requests
  std::optional<double> mean_queue_wait;  // start - arrival, every started request

  friend bool operator==(const BenchAggregates&, const BenchAggregates&) = default;
};

BenchAggregates aggregate(std::span<const BenchRequestRecord> records);

struct InFlightPoint {
  double time = 0.0;
  std::size_t in_flight = 0;

  friend bool operator==(const InFlightPoint&, const InFlightPoint&) = default;
};

/// Step function of the number of started-but-unfinished requests.
std::vector<InFlightPoint> in_flight_series(std::span<const BenchRequestRecord> records);

struct BenchReport {
  std::string mode;  // sequential | continuous
  std::optional<int> concurrency_cap;
  std::optional<double> timeout_s;
  std::vector<BenchRequestRecord> records;
  BenchAggregates aggregates;
  std::vector<InFlightPoint> in_flight;
};

BenchReport make_report(std::string mode, std::optional<int> cap, std::optional<double> timeout,
                        std::vector<BenchRequestRecord> records);

/// request_id,stream_id,arrival,start,end,status,queue_wait,service,response
std::string to_csv(std::span<const BenchRequestRecord> records);

nlohmann::json to_json(const Summary& s);
nlohmann::json to_json(const BenchAggregates& a);
nlohmann::json to_json(const BenchReport& report);
nlohmann::json sweep_summary(std::span<const BenchReport> reports);

}  // namespace foundry::gateway
