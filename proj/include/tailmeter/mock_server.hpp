#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "tailmeter/distribution.hpp"

namespace tailmeter {

/// In-process memcached stand-in for benchmarking the toolkit against a
/// server whose latency is under experimental control.
struct MockServerConfig {
  uint16_t port = 0;  // 0 binds an ephemeral port; read it back via port()
  DistributionPtr delay;  // per-response injected delay in seconds; null = none
  uint64_t seed = 1;
  size_t max_items = 1u << 16;      // store is bounded; inserts beyond evict arbitrarily
  size_t max_value_bytes = 1u << 20;
};

class MockServer {
 public:
  explicit MockServer(MockServerConfig config);
  ~MockServer();

  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  /// Binds, listens, and starts serving. Throws std::system_error on bind
  /// failure. Safe to call once.
  void start();
  void stop();

  uint16_t port() const { return port_; }
  uint64_t requests_served() const { return requests_served_.load(); }

 private:
  struct Connection;

  void accept_loop();
  void serve(int fd, uint64_t connection_id);

  MockServerConfig config_;
  int listen_fd_ = -1;
  uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::atomic<uint64_t> requests_served_{0};
  std::thread accept_thread_;

  std::mutex connections_mutex_;
  std::vector<std::unique_ptr<Connection>> connections_;
  uint64_t next_connection_id_ = 0;

  std::mutex store_mutex_;
  struct Item {
    uint32_t flags;
    std::string value;
  };
  std::unordered_map<std::string, Item> store_;
};

}  // namespace tailmeter
