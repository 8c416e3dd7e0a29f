#include "tailmeter/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace tailmeter {

namespace {

void require_nonempty(const LatencyTrace& trace) {
  if (trace.empty()) throw std::invalid_argument("metrics require a non-empty trace");
}

// ceil(p * n) evaluated with a guard against cases like 0.3 * 10 landing a
// hair above the integer it represents.
uint64_t nearest_rank(double p, uint64_t n) {
  double raw = std::ceil(p * static_cast<double>(n) - 1e-9);
  auto rank = static_cast<uint64_t>(raw);
  if (rank < 1) rank = 1;
  if (rank > n) rank = n;
  return rank;
}

}  // namespace

OutlierThreshold::OutlierThreshold(int64_t ns) : ns_(ns) {
  if (ns <= 0) throw std::invalid_argument("outlier threshold must be positive");
}

OutlierReport outlier_proportion(const LatencyTrace& trace, OutlierThreshold t) {
  require_nonempty(trace);
  uint64_t outliers = 0;
  uint64_t failed = 0;
  for (const auto& rec : trace.records()) {
    if (rec.status != RequestStatus::Ok) {
      ++failed;
      ++outliers;
    } else if (rec.latency_ns > t.ns()) {
      ++outliers;
    }
  }
  uint64_t n = trace.size();
  return OutlierReport{
      .n_total = n,
      .m_outliers = outliers,
      .m_failed = failed,
      .outlier_proportion = static_cast<double>(outliers) / static_cast<double>(n),
      .valid_throughput = n - outliers,
      .threshold = t,
  };
}

uint64_t valid_throughput(const LatencyTrace& trace, OutlierThreshold t) {
  return outlier_proportion(trace, t).valid_throughput;
}

int64_t percentile(const LatencyTrace& trace, double p) {
  require_nonempty(trace);
  if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("percentile p must be in (0, 1]");
  std::vector<int64_t> sorted = trace.latencies();
  std::sort(sorted.begin(), sorted.end());
  return sorted[nearest_rank(p, sorted.size()) - 1];
}

double tail_latency(const LatencyTrace& trace, double n) {
  require_nonempty(trace);
  if (!(n > 0.0) || !(n < 1.0)) throw std::invalid_argument("tail fraction must be in (0, 1)");
  std::vector<int64_t> sorted = trace.latencies();
  std::sort(sorted.begin(), sorted.end());
  auto count = static_cast<uint64_t>(sorted.size());
  auto rank = static_cast<uint64_t>(std::floor(n * static_cast<double>(count) + 1e-9));
  if (rank > count) rank = count;
  if (rank == 0) {
    double sum = std::accumulate(sorted.begin(), sorted.end(), 0.0);
    return sum / static_cast<double>(count);
  }
  int64_t cutoff = sorted[rank - 1];
  auto first = std::upper_bound(sorted.begin(), sorted.end(), cutoff);
  if (first == sorted.end()) return static_cast<double>(sorted.back());
  double sum = std::accumulate(first, sorted.end(), 0.0);
  return sum / static_cast<double>(sorted.end() - first);
}

std::vector<OutlierReport> sweep(const LatencyTrace& trace,
                                 const std::vector<OutlierThreshold>& thresholds) {
  require_nonempty(trace);
  uint64_t failed = 0;
  std::vector<int64_t> ok_latencies;
  ok_latencies.reserve(trace.size());
  for (const auto& rec : trace.records()) {
    if (rec.status != RequestStatus::Ok) {
      ++failed;
    } else {
      ok_latencies.push_back(rec.latency_ns);
    }
  }
  std::sort(ok_latencies.begin(), ok_latencies.end());

  uint64_t n = trace.size();
  std::vector<OutlierReport> reports;
  reports.reserve(thresholds.size());
  for (OutlierThreshold t : thresholds) {
    auto within = static_cast<uint64_t>(
        std::upper_bound(ok_latencies.begin(), ok_latencies.end(), t.ns()) -
        ok_latencies.begin());
    uint64_t outliers = failed + (ok_latencies.size() - within);
    reports.push_back(OutlierReport{
        .n_total = n,
        .m_outliers = outliers,
        .m_failed = failed,
        .outlier_proportion = static_cast<double>(outliers) / static_cast<double>(n),
        .valid_throughput = n - outliers,
        .threshold = t,
    });
  }
  return reports;
}

double LatencyHistogram::value_at_percentile(double p) const {
  if (total_ == 0) throw std::logic_error("empty histogram");
  if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("percentile p must be in (0, 1]");
  uint64_t rank = nearest_rank(p, total_);
  uint64_t cumulative = 0;
  for (size_t i = 0; i < counts_.size(); ++i) {
    cumulative += counts_[i];
    if (cumulative >= rank) {
      if (edges_[i] == 0.0) return 0.0;
      double rep = std::sqrt(edges_[i] * edges_[i + 1]);
      return std::clamp(rep, static_cast<double>(min_latency_),
                        static_cast<double>(max_latency_));
    }
  }
  return static_cast<double>(max_latency_);
}

LatencyHistogram build_histogram(const LatencyTrace& trace, int significant_digits) {
  require_nonempty(trace);
  if (significant_digits < 1 || significant_digits > 5) {
    throw std::invalid_argument("significant_digits must be in 1..5");
  }
  std::vector<int64_t> latencies = trace.latencies();

  LatencyHistogram hist;
  hist.relative_error_ = std::pow(10.0, -significant_digits);
  hist.total_ = latencies.size();
  hist.min_latency_ = *std::min_element(latencies.begin(), latencies.end());
  hist.max_latency_ = *std::max_element(latencies.begin(), latencies.end());

  int64_t min_positive = 0;
  for (int64_t v : latencies) {
    if (v > 0 && (min_positive == 0 || v < min_positive)) min_positive = v;
  }
  bool has_zero = hist.min_latency_ == 0;

  if (min_positive == 0) {
    // Every latency is zero: a single [0, 1) bucket holds them all.
    hist.edges_ = {0.0, 1.0};
    hist.counts_ = {hist.total_};
    return hist;
  }

  // Geometric buckets with ratio (1 + e)^2: the geometric-mean representative
  // b^(i + 1/2) is then within a factor (1 + e) of both bucket edges.
  double base = 1.0 + hist.relative_error_;
  double log_base = 2.0 * std::log1p(hist.relative_error_);
  auto edge_at = [&](int64_t i) { return std::pow(base, 2.0 * static_cast<double>(i)); };
  auto index_of = [&](int64_t v) {
    auto i = static_cast<int64_t>(std::floor(std::log(static_cast<double>(v)) / log_base));
    while (edge_at(i) > static_cast<double>(v)) --i;
    while (edge_at(i + 1) <= static_cast<double>(v)) ++i;
    return i;
  };

  int64_t lo = index_of(min_positive);
  int64_t hi = index_of(hist.max_latency_);

  if (has_zero) hist.edges_.push_back(0.0);
  for (int64_t i = lo; i <= hi + 1; ++i) hist.edges_.push_back(edge_at(i));
  hist.counts_.assign(hist.edges_.size() - 1, 0);

  for (int64_t v : latencies) {
    auto it = std::upper_bound(hist.edges_.begin(), hist.edges_.end(), static_cast<double>(v));
    hist.counts_[static_cast<size_t>(it - hist.edges_.begin()) - 1] += 1;
  }
  return hist;
}

}  // namespace tailmeter
