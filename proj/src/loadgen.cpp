#include "tailmeter/loadgen.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <deque>
#include <latch>
#include <optional>
#include <thread>
#include <vector>

#include "tailmeter/protocol.hpp"
#include "tailmeter/rng.hpp"

namespace tailmeter {

namespace {

int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Sleep coarsely, then spin the last stretch: sleep_until alone overshoots
// by scheduler latency, which an open-loop sender cannot afford.
void precise_sleep_until(int64_t target) {
  constexpr int64_t kSpinWindow = 50'000;
  int64_t remaining = target - now_ns();
  if (remaining > kSpinWindow) {
    std::this_thread::sleep_for(std::chrono::nanoseconds(remaining - kSpinWindow));
  }
  while (now_ns() < target) {
  }
}

void validate(const WorkloadConfig& config) {
  if (!(config.rate > 0)) throw std::invalid_argument("rate must be > 0");
  if (!(config.duration > 0)) throw std::invalid_argument("duration must be > 0");
  if (!(config.warmup >= 0) || !(config.warmup < config.duration)) {
    throw std::invalid_argument("warmup must be in [0, duration)");
  }
  if (config.connections == 0) throw std::invalid_argument("connections must be >= 1");
  if (config.pipeline_depth == 0) throw std::invalid_argument("pipeline depth must be >= 1");
  if (!(config.get_fraction >= 0) || !(config.get_fraction <= 1)) {
    throw std::invalid_argument("get fraction must be in [0, 1]");
  }
  if (config.key_count == 0) throw std::invalid_argument("key count must be >= 1");
  if (!(config.timeout > 0)) throw std::invalid_argument("timeout must be > 0");
}

int connect_to(const std::string& host, uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  std::string port_text = std::to_string(port);
  int rc = ::getaddrinfo(host.c_str(), port_text.c_str(), &hints, &result);
  if (rc != 0) {
    throw std::runtime_error("cannot resolve " + host + ": " + gai_strerror(rc));
  }
  int fd = -1;
  std::string error = "no usable address";
  for (addrinfo* ai = result; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    error = std::strerror(errno);
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(result);
  if (fd < 0) {
    throw std::runtime_error("connect to " + host + ":" + port_text + " failed: " + error);
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return fd;
}

bool send_all(int fd, std::string_view data, std::string& error) {
  while (!data.empty()) {
    ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      error = std::strerror(errno);
      return false;
    }
    data.remove_prefix(static_cast<size_t>(n));
  }
  return true;
}

struct Pending {
  int64_t intended_ns;
  int64_t actual_send_ns;
  bool is_get;
};

struct WorkerResult {
  std::vector<LatencyRecord> records;
  std::optional<std::string> error;
};

class Worker {
 public:
  Worker(const WorkloadConfig& config, unsigned index, uint64_t total_requests,
         const std::string& value_payload)
      : config_(config),
        index_(index),
        total_requests_(total_requests),
        value_payload_(value_payload),
        timeout_ns_(static_cast<int64_t>(std::llround(config.timeout * 1e9))),
        warmup_ns_(static_cast<int64_t>(std::llround(config.warmup * 1e9))) {}

  void connect() { fd_ = connect_to(config_.host, config_.port); }

  WorkerResult run(int64_t start_ns) {
    start_ns_ = start_ns;
    try {
      loop();
    } catch (const std::exception& e) {
      result_.error = e.what();
    }
    if (fd_ >= 0) ::close(fd_);
    return std::move(result_);
  }

 private:
  int64_t intended_ns(uint64_t k) const {
    return static_cast<int64_t>(std::llround(static_cast<double>(k) * 1e9 / config_.rate));
  }

  void record(int64_t intended, int64_t latency, RequestStatus status) {
    if (intended < warmup_ns_) return;
    result_.records.push_back(LatencyRecord{intended - warmup_ns_, latency, status});
  }

  void send_request(uint64_t k) {
    // Key and verb depend only on (seed, k), so the request mix is
    // reproducible no matter how requests land on connections.
    Rng rng(Rng::fold(config_.seed, k));
    bool is_get = rng.next_unit() <= config_.get_fraction;
    uint64_t key_index = static_cast<uint64_t>(
        (static_cast<unsigned __int128>(rng.next_u64()) * config_.key_count) >> 64);
    char key[32];
    std::snprintf(key, sizeof(key), "key:%08llu",
                  static_cast<unsigned long long>(key_index));

    std::string wire =
        is_get ? memproto::encode_get(key) : memproto::encode_set(key, value_payload_);
    int64_t intended = intended_ns(k);
    std::string error;
    if (!send_all(fd_, wire, error)) {
      throw std::runtime_error("send failed: " + error);
    }
    inflight_.push_back(Pending{intended, now_ns() - start_ns_, is_get});
  }

  void handle_timeout(int64_t now_rel) {
    for (const Pending& p : inflight_) {
      record(p.intended_ns, now_rel - p.intended_ns, RequestStatus::Timeout);
    }
    inflight_.clear();
    rx_.clear();
    ::close(fd_);
    fd_ = -1;
    fd_ = connect_to(config_.host, config_.port);
  }

  void drain_responses() {
    char chunk[65536];
    ssize_t n = ::recv(fd_, chunk, sizeof(chunk), MSG_DONTWAIT);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) return;
      throw std::runtime_error(std::string("recv failed: ") + std::strerror(errno));
    }
    if (n == 0) throw std::runtime_error("server closed the connection");
    rx_.append(chunk, static_cast<size_t>(n));
    int64_t completed_at = now_ns() - start_ns_;

    size_t offset = 0;
    while (true) {
      memproto::Response response;
      size_t consumed =
          memproto::parse_response(std::string_view(rx_).substr(offset), response);
      if (consumed == 0) {
        if (response.kind == memproto::ResponseKind::Malformed) {
          throw std::runtime_error("malformed response from server");
        }
        break;
      }
      offset += consumed;
      if (inflight_.empty()) {
        throw std::runtime_error("response received with no request outstanding");
      }
      Pending p = inflight_.front();
      inflight_.pop_front();
      record(p.intended_ns, completed_at - p.intended_ns, classify(p.is_get, response.kind));
    }
    rx_.erase(0, offset);
  }

  RequestStatus classify(bool is_get, memproto::ResponseKind kind) {
    using memproto::ResponseKind;
    if (is_get && (kind == ResponseKind::Hit || kind == ResponseKind::Miss)) {
      return RequestStatus::Ok;
    }
    if (!is_get && kind == ResponseKind::Stored) return RequestStatus::Ok;
    switch (kind) {
      case ResponseKind::Error:
      case ResponseKind::ClientError:
      case ResponseKind::ServerError:
      case ResponseKind::NotStored:
      case ResponseKind::NotFound:
        return RequestStatus::Error;
      default:
        // A value answer to a set (or vice versa) means request/response
        // pairing is lost.
        throw std::runtime_error("response kind does not match the outstanding request");
    }
  }

  void wait_readable(int64_t wake_abs) {
    pollfd pfd{fd_, POLLIN, 0};
    int64_t wait = wake_abs - now_ns();
    if (wait < 0) wait = 0;
    timespec ts{wait / 1'000'000'000, wait % 1'000'000'000};
    int rc = ::ppoll(&pfd, 1, &ts, nullptr);
    if (rc < 0 && errno != EINTR) {
      throw std::runtime_error(std::string("poll failed: ") + std::strerror(errno));
    }
    if (rc > 0) drain_responses();
  }

  void loop() {
    uint64_t next = index_;
    int64_t last_now = 0;
    while (next < total_requests_ || !inflight_.empty()) {
      bool can_send = next < total_requests_ && inflight_.size() < config_.pipeline_depth;
      if (can_send && inflight_.empty()) {
        precise_sleep_until(start_ns_ + intended_ns(next));
        send_request(next);
        next += config_.connections;
        continue;
      }
      int64_t now_rel = now_ns() - start_ns_;
      if (now_rel < last_now) {
        throw std::runtime_error("monotonic clock went backwards");
      }
      last_now = now_rel;
      if (can_send && now_rel >= intended_ns(next)) {
        send_request(next);
        next += config_.connections;
        continue;
      }
      int64_t front_deadline = inflight_.front().actual_send_ns + timeout_ns_;
      if (now_rel >= front_deadline) {
        handle_timeout(now_rel);
        continue;
      }
      int64_t wake_rel = front_deadline;
      if (can_send) wake_rel = std::min(wake_rel, intended_ns(next));
      wait_readable(start_ns_ + wake_rel);
    }
  }

  const WorkloadConfig& config_;
  unsigned index_;
  uint64_t total_requests_;
  const std::string& value_payload_;
  int64_t timeout_ns_;
  int64_t warmup_ns_;
  int64_t start_ns_ = 0;
  int fd_ = -1;
  std::deque<Pending> inflight_;
  std::string rx_;
  WorkerResult result_;
};

}  // namespace

LatencyTrace run_benchmark(const WorkloadConfig& config) {
  validate(config);
  auto total_requests =
      static_cast<uint64_t>(std::llround(config.duration * config.rate));
  if (total_requests == 0) throw std::invalid_argument("workload produces no requests");

  unsigned connections = config.connections;
  if (static_cast<uint64_t>(connections) > total_requests) {
    connections = static_cast<unsigned>(total_requests);
  }
  std::string value_payload(config.value_bytes, 'x');

  std::vector<Worker> workers;
  workers.reserve(connections);
  for (unsigned c = 0; c < connections; ++c) {
    workers.emplace_back(config, c, total_requests, value_payload);
  }

  // All connections come up before the clock starts, otherwise connection
  // setup would eat into the first requests' budgets.
  std::vector<WorkerResult> results(connections);
  std::latch ready(connections);
  std::latch go(1);
  std::atomic<int64_t> start_ns{0};
  std::atomic<bool> connect_failed{false};
  std::vector<std::thread> threads;
  threads.reserve(connections);
  for (unsigned c = 0; c < connections; ++c) {
    threads.emplace_back([&, c] {
      try {
        workers[c].connect();
      } catch (const std::exception& e) {
        results[c].error = e.what();
        connect_failed.store(true);
        ready.count_down();
        return;
      }
      ready.count_down();
      go.wait();
      if (!connect_failed.load()) {
        results[c] = workers[c].run(start_ns.load());
      }
    });
  }
  ready.wait();
  start_ns.store(now_ns() + 2'000'000);
  go.count_down();
  for (auto& thread : threads) thread.join();

  std::vector<LatencyRecord> merged;
  std::optional<std::string> error;
  for (auto& result : results) {
    merged.insert(merged.end(), result.records.begin(), result.records.end());
    if (result.error && !error) error = result.error;
  }
  std::stable_sort(merged.begin(), merged.end(),
                   [](const LatencyRecord& a, const LatencyRecord& b) {
                     return a.send_ns < b.send_ns;
                   });
  LatencyTrace trace{std::move(merged)};
  if (error) throw BenchmarkError(*error, std::move(trace));
  return trace;
}

}  // namespace tailmeter
