#include "foundry/gateway/bench.h"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <queue>
#include <thread>
#include <tuple>

#include "foundry/core/error.h"

namespace foundry::gateway {
namespace {

BenchPayload payload_for(const ContinuousOptions& options, RequestId id) {
  BenchPayload p{options.prompt, {}};
  if (!options.frames.empty()) p.image = options.frames[id % options.frames.size()];
  return p;
}

enum class VirtualKind { completion = 0, arrival = 1, deadline = 2 };

struct VirtualEvent {
  double time;
  VirtualKind kind;
  std::uint64_t seq;
  RequestId id;
  int stream;

  bool operator>(const VirtualEvent& o) const {
    return std::tie(time, kind, seq) > std::tie(o.time, o.kind, o.seq);
  }
};

BenchReport run_virtual(const ContinuousOptions& options, Backend& backend) {
  Scheduler sched(options.gateway);
  std::priority_queue<VirtualEvent, std::vector<VirtualEvent>, std::greater<>> events;
  std::uint64_t seq = 0;
  for (const auto& a : arrival_schedule(options.streams))
    events.push({a.time, VirtualKind::arrival, seq++, 0, a.stream_id});

  auto launch = [&](double now) {
    for (const auto& s : sched.take_started()) {
      const double service = backend.execute(payload_for(options, s.id), s.id, s.in_flight);
      events.push({now + service, VirtualKind::completion, seq++, s.id, 0});
    }
  };

  while (!events.empty()) {
    const VirtualEvent ev = events.top();
    events.pop();
    switch (ev.kind) {
      case VirtualKind::arrival: {
        const auto sub = sched.submit(ev.stream, ev.time);
        events.push({strict_deadline(ev.time, options.gateway.timeout_s), VirtualKind::deadline, seq++, sub.id, 0});
        break;
      }
      case VirtualKind::completion: sched.complete(ev.id, ev.time); break;
      case VirtualKind::deadline: sched.enforce_timeout(ev.time); break;
    }
    launch(ev.time);
  }
  return make_report("continuous", options.gateway.concurrency_cap, options.gateway.timeout_s, sched.records());
}

struct Message {
  enum Kind { arrival, completion, failure, stream_done } kind;
  int stream = 0;
  RequestId id = 0;
  std::exception_ptr error;
};

class Mailbox {
 public:
  void post(Message m) {
    {
      std::lock_guard lock(mu_);
      q_.push_back(std::move(m));
    }
    cv_.notify_one();
  }

  template <class Clock>
  std::optional<Message> wait_until(std::chrono::time_point<Clock, std::chrono::duration<double>> deadline) {
    std::unique_lock lock(mu_);
    cv_.wait_until(lock, deadline, [&] { return !q_.empty(); });
    if (q_.empty()) return std::nullopt;
    Message m = std::move(q_.front());
    q_.pop_front();
    return m;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Message> q_;
};

BenchReport run_wall_clock(const ContinuousOptions& options, Backend& backend) {
  using Clock = std::chrono::steady_clock;
  using Tp = std::chrono::time_point<Clock, std::chrono::duration<double>>;
  const Tp t0 = Clock::now();
  auto now_s = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  Scheduler sched(options.gateway);
  Mailbox mailbox;
  const auto schedule = arrival_schedule(options.streams);

  std::vector<std::jthread> workers;
  std::vector<std::jthread> producers;
  for (int s = 0; s < options.streams.streams; ++s) {
    producers.emplace_back([&, s](std::stop_token stop) {
      for (const auto& a : schedule) {
        if (a.stream_id != s) continue;
        std::this_thread::sleep_until(t0 + std::chrono::duration<double>(a.time));
        if (stop.stop_requested()) break;
        mailbox.post({Message::arrival, s, 0, nullptr});
      }
      mailbox.post({Message::stream_done, s, 0, nullptr});
    });
  }

  auto launch = [&] {
    for (const auto& s : sched.take_started()) {
      workers.emplace_back([&, s] {
        try {
          backend.execute(payload_for(options, s.id), s.id, s.in_flight);
          mailbox.post({Message::completion, 0, s.id, nullptr});
        } catch (...) {
          mailbox.post({Message::failure, 0, s.id, std::current_exception()});
        }
      });
    }
  };

  int streams_open = options.streams.streams;
  std::exception_ptr failure;
  while (!failure && (streams_open > 0 || sched.in_flight() > 0 || sched.queued() > 0)) {
    const auto deadline = sched.next_deadline();
    const Tp wake = deadline ? t0 + std::chrono::duration<double>(*deadline) : Tp(Clock::now() + std::chrono::hours(1));
    auto msg = mailbox.wait_until(wake);
    if (!msg) {
      sched.enforce_timeout(now_s());
    } else {
      switch (msg->kind) {
        case Message::arrival: sched.submit(msg->stream, now_s()); break;
        case Message::completion: sched.complete(msg->id, now_s()); break;
        case Message::failure: failure = msg->error; break;
        case Message::stream_done: --streams_open; break;
      }
      sched.enforce_timeout(now_s());
    }
    launch();
  }
  for (auto& p : producers) p.request_stop();
  producers.clear();
  workers.clear();
  if (failure) std::rethrow_exception(failure);
  return make_report("continuous", options.gateway.concurrency_cap, options.gateway.timeout_s, sched.records());
}

}  // namespace

std::vector<Arrival> arrival_schedule(const StreamSpec& spec) {
  if (!(spec.hz > 0.0)) throw Error(ErrorCode::invalid_argument, "frame rate must be > 0");
  if (spec.streams < 0 || spec.duration_s < 0.0) throw Error(ErrorCode::invalid_argument, "negative stream spec");
  std::vector<Arrival> out;
  for (int s = 0; s < spec.streams; ++s) {
    const double offset = static_cast<double>(s) / (spec.streams * spec.hz);
    for (long k = 0;; ++k) {
      const double t = offset + static_cast<double>(k) / spec.hz;
      if (t >= spec.duration_s) break;
      out.push_back({s, t});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Arrival& a, const Arrival& b) {
    return std::tie(a.time, a.stream_id) < std::tie(b.time, b.stream_id);
  });
  return out;
}

BenchReport run_sequential_bench(std::span<const std::filesystem::path> images, const std::string& prompt,
                                 Backend& backend) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto wall = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  std::vector<BenchRequestRecord> records;
  double t = 0.0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    BenchRequestRecord r;
    r.request_id = i;
    r.arrival = backend.is_virtual() ? t : wall();
    r.start = r.arrival;
    const double service = backend.execute({prompt, images[i]}, i, 1);
    if (backend.is_virtual()) {
      t = r.arrival + service;
      r.end = t;
    } else {
      r.end = wall();
    }
    r.status = RequestStatus::completed;
    records.push_back(r);
  }
  return make_report("sequential", std::nullopt, std::nullopt, std::move(records));
}

BenchReport run_continuous_bench(const ContinuousOptions& options, Backend& backend) {
  if (options.virtual_time) {
    if (!backend.is_virtual())
      throw Error(ErrorCode::invalid_argument, "virtual-time benchmarking needs the simulated backend");
    return run_virtual(options, backend);
  }
  return run_wall_clock(options, backend);
}

std::vector<BenchReport> run_sweep(const ContinuousOptions& options, std::span<const int> caps, Backend& backend) {
  std::vector<BenchReport> out;
  for (int k : caps) {
    ContinuousOptions o = options;
    o.gateway.concurrency_cap = k;
    out.push_back(run_continuous_bench(o, backend));
  }
  return out;
}

CapacityFit fit_capacity_exponent(const BackendModel& base, const ContinuousOptions& options,
                                  std::span<const std::pair<int, double>> targets, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::invalid_argument, "grid step must be > 0");
  ContinuousOptions o = options;
  o.virtual_time = true;
  CapacityFit best{0.0, std::numeric_limits<double>::infinity()};
  const int n = static_cast<int>(std::floor(1.0 / step + 1e-9));
  for (int i = 0; i <= n; ++i) {
    BackendModel model = base;
    model.gamma = std::min(1.0, i * step);
    SimulatedBackend backend(model, true);
    double loss = 0.0;
    for (const auto& [k, target] : targets) {
      o.gateway.concurrency_cap = k;
      const auto report = run_continuous_bench(o, backend);
      const double mean = report.aggregates.service ? report.aggregates.service->mean : 0.0;
      loss += ((mean - target) / target) * ((mean - target) / target);
    }
    if (loss < best.loss) best = {model.gamma, loss};
  }
  return best;
}

}  // namespace foundry::gateway
