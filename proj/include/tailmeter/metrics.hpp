#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include "tailmeter/trace.hpp"

namespace tailmeter {

/// Latency deadline defining an outlier. Strictly positive nanoseconds.
class OutlierThreshold {
 public:
  explicit OutlierThreshold(int64_t ns);
  int64_t ns() const { return ns_; }

  friend auto operator<=>(const OutlierThreshold&, const OutlierThreshold&) = default;

 private:
  int64_t ns_;
};

/// Quality-of-service summary for one (trace, threshold) pair.
///
/// A record is an outlier when its latency strictly exceeds the threshold
/// or when its status is Error/Timeout (a failed request cannot have
/// satisfied the deadline). Failed records are also counted separately.
struct OutlierReport {
  uint64_t n_total;
  uint64_t m_outliers;
  uint64_t m_failed;  // Error/Timeout records, a subset of m_outliers
  double outlier_proportion;
  uint64_t valid_throughput;  // n_total - m_outliers
  OutlierThreshold threshold;

  friend bool operator==(const OutlierReport&, const OutlierReport&) = default;
};

OutlierReport outlier_proportion(const LatencyTrace& trace, OutlierThreshold t);

/// Requests completed within the threshold: n_total - m_outliers.
uint64_t valid_throughput(const LatencyTrace& trace, OutlierThreshold t);

/// Nearest-rank percentile: the ceil(p * N)-th smallest latency, p in (0, 1].
int64_t percentile(const LatencyTrace& trace, double p);

/// Mean latency of all records beyond the n-th percentile, n in (0, 1).
/// The cutoff is the floor(n * N)-th order statistic, so the beyond-set is
/// the top N - floor(n * N) ranked samples; when every remaining sample ties
/// with the cutoff the maximum latency is returned instead of an undefined
/// mean. Fractional means are possible, hence the double return.
double tail_latency(const LatencyTrace& trace, double n);

/// One OutlierReport per threshold, in input order.
std::vector<OutlierReport> sweep(const LatencyTrace& trace,
                                 const std::vector<OutlierThreshold>& thresholds);

/// Log-spaced latency histogram with a bounded relative error.
///
/// Buckets are geometric with ratio (1 + e)^2 where e = 10^-significant_digits,
/// so the geometric-mean representative of any bucket is within relative
/// error e of every value recorded in it. Zero latencies, when present, get
/// a dedicated [0, min_positive) bucket.
class LatencyHistogram {
 public:
  uint64_t total() const { return total_; }
  int64_t min_latency() const { return min_latency_; }
  int64_t max_latency() const { return max_latency_; }
  double relative_error() const { return relative_error_; }

  /// Strictly increasing bucket edges; bucket i spans [edges[i], edges[i+1]).
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<uint64_t>& counts() const { return counts_; }

  /// Reconstructed nearest-rank percentile, within relative_error() of the
  /// exact percentile of the recorded values. p in (0, 1].
  double value_at_percentile(double p) const;

 private:
  friend LatencyHistogram build_histogram(const LatencyTrace&, int);

  std::vector<double> edges_;
  std::vector<uint64_t> counts_;
  uint64_t total_ = 0;
  int64_t min_latency_ = 0;
  int64_t max_latency_ = 0;
  double relative_error_ = 0;
};

/// significant_digits must be in 1..5.
LatencyHistogram build_histogram(const LatencyTrace& trace, int significant_digits);

}  // namespace tailmeter
