#include "tailmeter/fanout_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <utility>

#include "tailmeter/rng.hpp"

namespace tailmeter {

namespace {

void validate(const FanoutConfig& config) {
  if (!config.leaf) throw std::invalid_argument("fan-out simulation needs a leaf distribution");
  if (config.servers == 0 || config.requests_per_server == 0) {
    throw std::invalid_argument("fan-out must be at least 1");
  }
  if (config.trials == 0) throw std::invalid_argument("trials must be at least 1");
  if (config.mitigation.replication == 0) {
    throw std::invalid_argument("replication factor must be at least 1");
  }
  if (config.mitigation.reissue && !(config.mitigation.reissue_delay >= 0)) {
    throw std::invalid_argument("reissue delay must be >= 0");
  }
  const auto& corr = config.correlation;
  if (!(corr.probability >= 0) || !(corr.probability < 1)) {
    throw std::invalid_argument("correlation probability must be in [0, 1)");
  }
  if (!(corr.multiplier >= 1)) {
    throw std::invalid_argument("correlation multiplier must be >= 1");
  }
}

struct TrialOutcome {
  double latency;
  uint64_t attempts;
};

// Latency of one sub-request. The stream is keyed by (seed, trial, sub), so
// mitigations only ever consume extra draws from their own stream: turning a
// mitigation on or off never shifts the base samples of other sub-requests,
// which is what makes same-seed comparisons meaningful.
double run_sub_request(uint64_t trial_key, uint64_t sub, const FanoutConfig& config,
                       double multiplier, uint64_t& attempts) {
  Rng rng(Rng::fold(trial_key, sub));
  const Distribution& leaf = *config.leaf;
  const MitigationSpec& mit = config.mitigation;

  double best = leaf.sample(rng) * multiplier;
  attempts += 1;
  for (uint32_t r = 1; r < mit.replication; ++r) {
    best = std::min(best, leaf.sample(rng) * multiplier);
    attempts += 1;
  }
  if (mit.reissue && best > mit.reissue_delay) {
    double duplicate = mit.reissue_delay + leaf.sample(rng) * multiplier;
    best = std::min(best, duplicate);
    attempts += 1;
  }
  return best;
}

TrialOutcome run_trial(uint64_t trial, const FanoutConfig& config) {
  uint64_t trial_key = Rng::fold(config.seed, trial);
  double multiplier = 1.0;
  if (config.correlation.probability > 0) {
    Rng trial_rng(trial_key);
    if (trial_rng.next_unit() <= config.correlation.probability) {
      multiplier = config.correlation.multiplier;
    }
  }
  uint64_t subs = config.servers * config.requests_per_server;
  TrialOutcome outcome{0.0, 0};
  for (uint64_t sub = 0; sub < subs; ++sub) {
    outcome.latency = std::max(
        outcome.latency, run_sub_request(trial_key, sub, config, multiplier, outcome.attempts));
  }
  return outcome;
}

}  // namespace

SimulationResult::SimulationResult(std::vector<double> latencies, std::vector<uint64_t> attempts)
    : latencies_(std::move(latencies)), attempts_(std::move(attempts)), sorted_(latencies_) {
  if (latencies_.empty()) throw std::invalid_argument("simulation produced no trials");
  if (attempts_.size() != latencies_.size()) {
    throw std::invalid_argument("attempt accounting must cover every trial");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double SimulationResult::outlier_proportion(double threshold) const {
  auto above = sorted_.end() - std::upper_bound(sorted_.begin(), sorted_.end(), threshold);
  return static_cast<double>(above) / static_cast<double>(sorted_.size());
}

double SimulationResult::mean() const {
  return std::accumulate(latencies_.begin(), latencies_.end(), 0.0) /
         static_cast<double>(latencies_.size());
}

double SimulationResult::percentile(double p) const {
  if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("percentile p must be in (0, 1]");
  double raw = std::ceil(p * static_cast<double>(sorted_.size()) - 1e-9);
  auto rank = static_cast<size_t>(std::max(raw, 1.0));
  if (rank > sorted_.size()) rank = sorted_.size();
  return sorted_[rank - 1];
}

double SimulationResult::mean_attempts() const {
  return std::accumulate(attempts_.begin(), attempts_.end(), 0.0) /
         static_cast<double>(attempts_.size());
}

SimulationResult simulate_fanout(const FanoutConfig& config) {
  validate(config);

  std::vector<double> latencies(config.trials);
  std::vector<uint64_t> attempts(config.trials);
  unsigned threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  if (threads == 0) threads = 1;
  if (static_cast<uint64_t>(threads) > config.trials) {
    threads = static_cast<unsigned>(config.trials);
  }

  auto run_range = [&](uint64_t begin, uint64_t end) {
    for (uint64_t t = begin; t < end; ++t) {
      TrialOutcome outcome = run_trial(t, config);
      latencies[t] = outcome.latency;
      attempts[t] = outcome.attempts;
    }
  };

  if (threads == 1) {
    run_range(0, config.trials);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(threads);
    uint64_t chunk = (config.trials + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
      uint64_t begin = static_cast<uint64_t>(w) * chunk;
      uint64_t end = std::min(begin + chunk, config.trials);
      if (begin >= end) break;
      workers.emplace_back([&run_range, begin, end] { run_range(begin, end); });
    }
    for (auto& worker : workers) worker.join();
  }
  return SimulationResult(std::move(latencies), std::move(attempts));
}

LatencyTrace to_trace(const SimulationResult& result) {
  std::vector<LatencyRecord> records;
  records.reserve(result.trials());
  const auto& latencies = result.service_latencies();
  for (size_t i = 0; i < latencies.size(); ++i) {
    records.push_back(LatencyRecord{static_cast<int64_t>(i),
                                    std::llround(latencies[i] * 1e9), RequestStatus::Ok});
  }
  return LatencyTrace(std::move(records));
}

DistributionPtr fit_empirical(const LatencyTrace& trace) {
  if (trace.empty()) throw std::invalid_argument("cannot fit a distribution to an empty trace");
  std::vector<double> samples;
  samples.reserve(trace.size());
  for (int64_t ns : trace.latencies()) {
    samples.push_back(static_cast<double>(ns) / 1e9);
  }
  return make_empirical(std::move(samples));
}

}  // namespace tailmeter
