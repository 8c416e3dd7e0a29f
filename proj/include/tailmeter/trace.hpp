#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace tailmeter {

enum class RequestStatus : uint8_t { Ok, Error, Timeout };

std::string_view to_string(RequestStatus s);
RequestStatus status_from_string(std::string_view s);

struct LatencyRecord {
  int64_t send_ns = 0;     // intended send time, relative to run start
  int64_t latency_ns = 0;  // measured from the intended send time
  RequestStatus status = RequestStatus::Ok;

  friend bool operator==(const LatencyRecord&, const LatencyRecord&) = default;
};

/// Ordered collection of per-request results. Records are sorted by send
/// time and latencies are integer nanoseconds, so counts stay exact.
class LatencyTrace {
 public:
  LatencyTrace() = default;
  explicit LatencyTrace(std::vector<LatencyRecord> records);

  /// Convenience for synthetic traces: send times are the element index,
  /// every record Ok.
  static LatencyTrace from_latencies(const std::vector<int64_t>& latencies_ns);

  const std::vector<LatencyRecord>& records() const { return records_; }
  size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::vector<int64_t> latencies() const;

  friend bool operator==(const LatencyTrace&, const LatencyTrace&) = default;

 private:
  std::vector<LatencyRecord> records_;
};

}  // namespace tailmeter
