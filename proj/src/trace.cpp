#include "tailmeter/trace.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace tailmeter {

std::string_view to_string(RequestStatus s) {
  switch (s) {
    case RequestStatus::Ok:
      return "ok";
    case RequestStatus::Error:
      return "error";
    case RequestStatus::Timeout:
      return "timeout";
  }
  return "ok";
}

RequestStatus status_from_string(std::string_view s) {
  if (s == "ok") return RequestStatus::Ok;
  if (s == "error") return RequestStatus::Error;
  if (s == "timeout") return RequestStatus::Timeout;
  throw std::invalid_argument("unknown request status: '" + std::string(s) + "'");
}

LatencyTrace::LatencyTrace(std::vector<LatencyRecord> records)
    : records_(std::move(records)) {
  int64_t prev_send = INT64_MIN;
  for (size_t i = 0; i < records_.size(); ++i) {
    const LatencyRecord& r = records_[i];
    if (r.send_ns < prev_send) {
      throw std::invalid_argument("trace record " + std::to_string(i) +
                                  ": send times must be non-decreasing");
    }
    if (r.latency_ns < 0) {
      throw std::invalid_argument("trace record " + std::to_string(i) +
                                  ": latency must be >= 0");
    }
    prev_send = r.send_ns;
  }
}

LatencyTrace LatencyTrace::from_latencies(const std::vector<int64_t>& latencies_ns) {
  std::vector<LatencyRecord> records;
  records.reserve(latencies_ns.size());
  for (size_t i = 0; i < latencies_ns.size(); ++i) {
    records.push_back({static_cast<int64_t>(i), latencies_ns[i], RequestStatus::Ok});
  }
  return LatencyTrace(std::move(records));
}

std::vector<int64_t> LatencyTrace::latencies() const {
  std::vector<int64_t> out;
  out.reserve(records_.size());
  for (const LatencyRecord& r : records_) out.push_back(r.latency_ns);
  return out;
}

}  // namespace tailmeter
