#include "foundry/gateway/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace foundry::gateway {
namespace {

std::string fmt(std::optional<double> v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

double nearest_rank(std::span<const double> sorted, double p) {
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

std::optional<Summary> summarize(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  Summary s;
  s.mean = sum / static_cast<double>(n);
  s.median = n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(n));
  s.p50 = nearest_rank(values, 50);
  s.p90 = nearest_rank(values, 90);
  s.p99 = nearest_rank(values, 99);
  return s;
}

BenchAggregates aggregate(std::span<const BenchRequestRecord> records) {
  BenchAggregates a;
  a.emitted = records.size();
  std::vector<double> response, service, waits;
  for (const auto& r : records) {
    switch (r.status) {
      case RequestStatus::completed:
        ++a.completed;
        response.push_back(*r.response());
        service.push_back(*r.service());
        break;
      case RequestStatus::timed_out_in_queue: ++a.timed_out_in_queue; break;
      case RequestStatus::timed_out_in_service: ++a.timed_out_in_service; break;
      default: ++a.pending; break;
    }
    if (auto w = r.queue_wait()) waits.push_back(*w);
  }
  a.response = summarize(std::move(response));
  a.service = summarize(std::move(service));
  if (auto w = summarize(std::move(waits))) a.mean_queue_wait = w->mean;
  return a;
}

std::vector<InFlightPoint> in_flight_series(std::span<const BenchRequestRecord> records) {
  std::map<double, long> delta;
  for (const auto& r : records) {
    if (!r.start) continue;
    delta[*r.start] += 1;
    if (r.end) delta[*r.end] -= 1;
    else if (r.dropped) delta[*r.dropped] -= 1;
  }
  std::vector<InFlightPoint> out;
  long level = 0;
  for (const auto& [t, d] : delta) {
    level += d;
    out.push_back({t, static_cast<std::size_t>(level)});
  }
  return out;
}

BenchReport make_report(std::string mode, std::optional<int> cap, std::optional<double> timeout,
                        std::vector<BenchRequestRecord> records) {
  BenchReport r;
  r.mode = std::move(mode);
  r.concurrency_cap = cap;
  r.timeout_s = timeout;
  r.aggregates = aggregate(records);
  r.in_flight = in_flight_series(records);
  r.records = std::move(records);
  return r;
}

std::string to_csv(std::span<const BenchRequestRecord> records) {
  std::string out = "request_id,stream_id,arrival,start,end,status,queue_wait,service,response\n";
  for (const auto& r : records) {
    out += std::to_string(r.request_id) + ',' + std::to_string(r.stream_id) + ',' + fmt(r.arrival) + ',' +
           fmt(r.start) + ',' + fmt(r.end) + ',' + std::string(to_string(r.status)) + ',' + fmt(r.queue_wait()) +
           ',' + fmt(r.service()) + ',' + fmt(r.response()) + '\n';
  }
  return out;
}

nlohmann::json to_json(const Summary& s) {
  return {{"mean", s.mean}, {"median", s.median}, {"std", s.std},
          {"p50", s.p50},   {"p90", s.p90},       {"p99", s.p99}};
}

nlohmann::json to_json(const BenchAggregates& a) {
  nlohmann::json j{{"emitted", a.emitted},
                   {"completed", a.completed},
                   {"drops", {{"timed_out_in_queue", a.timed_out_in_queue},
                              {"timed_out_in_service", a.timed_out_in_service}}},
                   {"pending", a.pending},
                   {"mean_queue_wait", opt(a.mean_queue_wait)}};
  j["response"] = a.response ? to_json(*a.response) : nlohmann::json(nullptr);
  j["service"] = a.service ? to_json(*a.service) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const BenchReport& report) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : report.records) {
    records.push_back({{"request_id", r.request_id},
                       {"stream_id", r.stream_id},
                       {"arrival", r.arrival},
                       {"start", opt(r.start)},
                       {"end", opt(r.end)},
                       {"dropped", opt(r.dropped)},
                       {"status", to_string(r.status)}});
  }
  nlohmann::json series = nlohmann::json::array();
  for (const auto& p : report.in_flight) series.push_back({p.time, p.in_flight});
  nlohmann::json j{{"mode", report.mode},
                   {"aggregates", to_json(report.aggregates)},
                   {"in_flight", series},
                   {"records", records}};
  if (report.concurrency_cap) j["concurrency_cap"] = *report.concurrency_cap;
  if (report.timeout_s) j["timeout_s"] = *report.timeout_s;
  return j;
}

nlohmann::json sweep_summary(std::span<const BenchReport> reports) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json row = to_json(r.aggregates);
    row["k"] = r.concurrency_cap ? nlohmann::json(*r.concurrency_cap) : nlohmann::json(nullptr);
    rows.push_back(std::move(row));
  }
  return {{"sweep", rows}};
}

}  // namespace foundry::gateway
