#pragma once

#include <cstdint>
#include <vector>

#include "tailmeter/distribution.hpp"
#include "tailmeter/trace.hpp"

namespace tailmeter {

/// With probability `probability` a trial suffers a machine-wide slowdown:
/// every leaf sample in that trial is multiplied by `multiplier`. Models
/// correlated stalls (GC, page reclaim) that independence assumptions miss.
struct CorrelationSpec {
  double probability = 0.0;  // in [0, 1)
  double multiplier = 1.0;   // >= 1
};

/// Tail-cutting mitigations applied per sub-request.
///
/// replication: issue the sub-request to `replication` replicas at once and
/// take the fastest.
///
/// reissue: if the first attempt has not answered after `reissue_delay`
/// seconds, send one duplicate and take whichever finishes first (the
/// duplicate completes at reissue_delay + its own fresh sample).
struct MitigationSpec {
  uint32_t replication = 1;
  bool reissue = false;
  double reissue_delay = 0.0;
};

struct FanoutConfig {
  uint64_t servers = 1;              // leaf servers touched per service call
  uint64_t requests_per_server = 1;  // instances per server that must answer
  DistributionPtr leaf;              // per-sub-request latency, in seconds
  uint64_t trials = 100000;
  uint64_t seed = 1;
  MitigationSpec mitigation;
  CorrelationSpec correlation;
  unsigned threads = 0;  // 0 picks hardware_concurrency
};

/// One service-level latency per trial, in trial order, plus how many leaf
/// attempts (replicas and reissues included) the trial cost. The sequences
/// are a pure function of the config (seed included) regardless of thread
/// count.
class SimulationResult {
 public:
  SimulationResult(std::vector<double> latencies, std::vector<uint64_t> attempts);

  const std::vector<double>& service_latencies() const { return latencies_; }
  const std::vector<uint64_t>& attempts() const { return attempts_; }
  uint64_t trials() const { return latencies_.size(); }

  /// Fraction of trials strictly above the threshold (seconds).
  double outlier_proportion(double threshold) const;
  double mean() const;
  /// Nearest-rank percentile, p in (0, 1].
  double percentile(double p) const;
  /// Mean leaf attempts per trial; sc * k when no mitigation fires.
  double mean_attempts() const;

 private:
  std::vector<double> latencies_;
  std::vector<uint64_t> attempts_;
  std::vector<double> sorted_;
};

SimulationResult simulate_fanout(const FanoutConfig& config);

/// Service latencies as a LatencyTrace (integer nanoseconds, send time =
/// trial index), so simulator output feeds the same analysis as measured
/// traces.
LatencyTrace to_trace(const SimulationResult& result);

/// Resamples a measured trace as a leaf distribution (uniform draws with
/// replacement over its latencies).
DistributionPtr fit_empirical(const LatencyTrace& trace);

}  // namespace tailmeter
