#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

namespace foundry::gateway {

using RequestId = std::uint64_t;

enum class RequestStatus { queued, in_flight, completed, timed_out_in_queue, timed_out_in_service };
std::string_view to_string(RequestStatus s);

/// Timestamps are seconds on a monotonic clock (virtual or wall).
struct BenchRequestRecord {
  RequestId request_id = 0;
  int stream_id = 0;
  double arrival = 0.0;
  std::optional<double> start;
  std::optional<double> end;      // completion time, completed requests only
  std::optional<double> dropped;  // time a timeout removed the request
  RequestStatus status = RequestStatus::queued;

  std::optional<double> queue_wait() const;
  std::optional<double> service() const;
  std::optional<double> response() const;

  friend bool operator==(const BenchRequestRecord&, const BenchRequestRecord&) = default;
};

struct GatewayConfig {
  int concurrency_cap = 1;
  double timeout_s = 10.0;
};

enum class EventKind { submit, start, complete, drop_queue, drop_service };

struct SchedulerEvent {
  double time = 0.0;
  EventKind kind = EventKind::submit;
  RequestId id = 0;
  std::size_t in_flight = 0;  // after the event
  std::size_t queued = 0;     // after the event
};

/// FIFO admission with an in-flight cap and total-age timeouts. Not thread
/// safe: one event loop owns it. Time passed to every call must be
/// non-decreasing (InvalidArgument otherwise).
class Scheduler {
 public:
  explicit Scheduler(GatewayConfig cfg);

  struct Submitted {
    RequestId id;
    bool started;
  };

  /// Starts the request if a slot is free, else queues it. Throws Shutdown
  /// after shutdown().
  Submitted submit(int stream_id, double now);

  /// Marks an in-flight request completed and starts queued requests into
  /// the freed slot. Returns false (and does nothing) when the request is no
  /// longer in flight.
  bool complete(RequestId id, double now);

  /// Drops every request with now - arrival > timeout.
  std::vector<RequestId> enforce_timeout(double now);

  struct Started {
    RequestId id;
    std::size_t in_flight;  // including this request, at its start
  };
  /// Requests started since the last call, in start order.
  std::vector<Started> take_started();

  void shutdown() { shut_down_ = true; }

  /// Earliest now at which enforce_timeout would drop something.
  std::optional<double> next_deadline() const;

  std::size_t in_flight() const { return in_flight_.size(); }
  std::size_t queued() const { return queue_.size(); }
  const GatewayConfig& config() const { return cfg_; }
  const std::vector<BenchRequestRecord>& records() const { return records_; }
  const BenchRequestRecord& record(RequestId id) const { return records_.at(id); }
  const std::vector<SchedulerEvent>& events() const { return events_; }

 private:
  void advance(double now);
  void fill_slots(double now);
  void log(double now, EventKind kind, RequestId id);

  GatewayConfig cfg_;
  std::vector<BenchRequestRecord> records_;
  std::deque<RequestId> queue_;
  std::set<RequestId> in_flight_;
  std::vector<Started> started_;
  std::vector<SchedulerEvent> events_;
  double now_ = 0.0;
  bool shut_down_ = false;
};

/// Smallest representable t with t - arrival > timeout.
double strict_deadline(double arrival, double timeout);

}  // namespace foundry::gateway
