#include "foundry/gateway/scheduler.h"

#include <cmath>
#include <limits>
#include <string>

#include "foundry/core/error.h"

namespace foundry::gateway {

std::string_view to_string(RequestStatus s) {
  switch (s) {
    case RequestStatus::queued: return "queued";
    case RequestStatus::in_flight: return "in_flight";
    case RequestStatus::completed: return "completed";
    case RequestStatus::timed_out_in_queue: return "timed_out_in_queue";
    case RequestStatus::timed_out_in_service: return "timed_out_in_service";
  }
  return "unknown";
}

std::optional<double> BenchRequestRecord::queue_wait() const {
  if (!start) return std::nullopt;
  return *start - arrival;
}

std::optional<double> BenchRequestRecord::service() const {
  if (!start || !end) return std::nullopt;
  return *end - *start;
}

std::optional<double> BenchRequestRecord::response() const {
  if (!end) return std::nullopt;
  return *end - arrival;
}

double strict_deadline(double arrival, double timeout) {
  double t = arrival + timeout;
  while (t - arrival <= timeout) t = std::nextafter(t, std::numeric_limits<double>::infinity());
  return t;
}

Scheduler::Scheduler(GatewayConfig cfg) : cfg_(cfg) {
  if (cfg_.concurrency_cap < 1) throw Error(ErrorCode::invalid_argument, "concurrency cap must be >= 1");
  if (!(cfg_.timeout_s > 0.0)) throw Error(ErrorCode::invalid_argument, "timeout must be > 0");
}

void Scheduler::advance(double now) {
  if (now < now_)
    throw Error(ErrorCode::invalid_argument,
                "scheduler time went backwards: " + std::to_string(now) + " < " + std::to_string(now_));
  now_ = now;
}

void Scheduler::log(double now, EventKind kind, RequestId id) {
  events_.push_back({now, kind, id, in_flight_.size(), queue_.size()});
}

void Scheduler::fill_slots(double now) {
  while (!queue_.empty() && in_flight_.size() < static_cast<std::size_t>(cfg_.concurrency_cap)) {
    const RequestId id = queue_.front();
    queue_.pop_front();
    auto& r = records_[id];
    r.start = now;
    r.status = RequestStatus::in_flight;
    in_flight_.insert(id);
    started_.push_back({id, in_flight_.size()});
    log(now, EventKind::start, id);
  }
}

Scheduler::Submitted Scheduler::submit(int stream_id, double now) {
  if (shut_down_) throw Error(ErrorCode::shutdown, "gateway is shut down");
  advance(now);
  const RequestId id = records_.size();
  BenchRequestRecord r;
  r.request_id = id;
  r.stream_id = stream_id;
  r.arrival = now;
  records_.push_back(r);
  queue_.push_back(id);
  log(now, EventKind::submit, id);
  fill_slots(now);
  return {id, records_[id].status == RequestStatus::in_flight};
}

bool Scheduler::complete(RequestId id, double now) {
  advance(now);
  if (!in_flight_.erase(id)) return false;
  auto& r = records_[id];
  r.end = now;
  r.status = RequestStatus::completed;
  log(now, EventKind::complete, id);
  fill_slots(now);
  return true;
}

std::vector<RequestId> Scheduler::enforce_timeout(double now) {
  advance(now);
  std::vector<RequestId> dropped;
  auto expired = [&](RequestId id) { return now - records_[id].arrival > cfg_.timeout_s; };

  // Queue is in arrival order, so expired entries form a prefix.
  while (!queue_.empty() && expired(queue_.front())) {
    const RequestId id = queue_.front();
    queue_.pop_front();
    auto& r = records_[id];
    r.status = RequestStatus::timed_out_in_queue;
    r.dropped = now;
    dropped.push_back(id);
    log(now, EventKind::drop_queue, id);
  }
  for (auto it = in_flight_.begin(); it != in_flight_.end();) {
    if (expired(*it)) {
      const RequestId id = *it;
      it = in_flight_.erase(it);
      auto& r = records_[id];
      r.status = RequestStatus::timed_out_in_service;
      r.dropped = now;
      dropped.push_back(id);
      log(now, EventKind::drop_service, id);
    } else {
      ++it;
    }
  }
  fill_slots(now);
  return dropped;
}

std::vector<Scheduler::Started> Scheduler::take_started() {
  std::vector<Started> out;
  out.swap(started_);
  return out;
}

std::optional<double> Scheduler::next_deadline() const {
  std::optional<double> best;
  auto consider = [&](RequestId id) {
    const double d = strict_deadline(records_[id].arrival, cfg_.timeout_s);
    if (!best || d < *best) best = d;
  };
  if (!queue_.empty()) consider(queue_.front());
  for (RequestId id : in_flight_) consider(id);
  return best;
}

}  // namespace foundry::gateway
