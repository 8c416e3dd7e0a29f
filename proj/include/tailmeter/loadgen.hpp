#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "tailmeter/trace.hpp"

namespace tailmeter {

/// Open-loop get/set workload against a memcached-speaking server.
///
/// Request k has an intended send time of start + k/rate. The generator
/// sleeps until that instant and sends regardless of whether earlier
/// responses have arrived, and every latency is measured from the intended
/// send time, so a stalled server inflates the recorded latencies instead
/// of silently pausing the workload (the coordinated-omission trap).
struct WorkloadConfig {
  std::string host = "127.0.0.1";
  uint16_t port = 11211;
  double rate = 1000.0;      // requests per second, across all connections
  double duration = 1.0;     // total run seconds, warmup included
  double warmup = 0.0;       // leading seconds whose records are dropped
  unsigned connections = 1;  // request k is owned by connection k % connections
  unsigned pipeline_depth = 1;  // per-connection in-flight cap
  double get_fraction = 0.9;
  uint64_t key_count = 1000;
  uint64_t value_bytes = 100;
  double timeout = 1.0;  // seconds from actual send to abandonment
  uint64_t seed = 1;
};

/// Thrown when the run cannot continue (refused connection, reset, protocol
/// violation). Whatever was measured before the failure rides along.
class BenchmarkError : public std::runtime_error {
 public:
  BenchmarkError(const std::string& message, LatencyTrace partial)
      : std::runtime_error(message), partial_(std::move(partial)) {}
  const LatencyTrace& partial_trace() const { return partial_; }

 private:
  LatencyTrace partial_;
};

/// Runs the workload and returns one record per post-warmup request, merged
/// across connections and ordered by intended send time (relative to the end
/// of warmup). Timed-out requests appear with status Timeout and the time
/// elapsed when they were abandoned; their connection is reopened.
LatencyTrace run_benchmark(const WorkloadConfig& config);

}  // namespace tailmeter
