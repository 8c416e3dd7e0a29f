#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tailmeter/amplification.hpp"
#include "tailmeter/dist_spec.hpp"
#include "tailmeter/duration.hpp"
#include "tailmeter/fanout_sim.hpp"
#include "tailmeter/metrics.hpp"
#include "tailmeter/trace.hpp"
#include "tailmeter/trace_io.hpp"

namespace py = pybind11;

using namespace tailmeter;

namespace {

LatencyTrace trace_from_rows(
    const std::vector<std::tuple<int64_t, int64_t, std::string>>& rows) {
  std::vector<LatencyRecord> records;
  records.reserve(rows.size());
  for (const auto& [send_ns, latency_ns, status] : rows) {
    records.push_back(LatencyRecord{send_ns, latency_ns, status_from_string(status)});
  }
  return LatencyTrace(std::move(records));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Tail-latency metrics, fan-out amplification math, and Monte Carlo fan-out "
            "simulation";

  py::class_<LatencyTrace>(m, "LatencyTrace")
      .def(py::init(&LatencyTrace::from_latencies), py::arg("latencies_ns"),
           "Build a trace from latencies alone; send times become indices.")
      .def_static("from_records", &trace_from_rows, py::arg("rows"),
                  "Build from (send_ns, latency_ns, status) tuples; status is "
                  "'ok', 'error', or 'timeout'.")
      .def("__len__", &LatencyTrace::size)
      .def("latencies", &LatencyTrace::latencies)
      .def("records",
           [](const LatencyTrace& trace) {
             std::vector<std::tuple<int64_t, int64_t, std::string>> rows;
             rows.reserve(trace.size());
             for (const auto& rec : trace.records()) {
               rows.emplace_back(rec.send_ns, rec.latency_ns,
                                 std::string(to_string(rec.status)));
             }
             return rows;
           })
      .def("__eq__", [](const LatencyTrace& a, const LatencyTrace& b) { return a == b; });

  m.def(
      "outlier_proportion",
      [](const LatencyTrace& trace, int64_t threshold_ns) {
        OutlierReport report = outlier_proportion(trace, OutlierThreshold(threshold_ns));
        py::dict out;
        out["n_total"] = report.n_total;
        out["m_outliers"] = report.m_outliers;
        out["m_failed"] = report.m_failed;
        out["outlier_proportion"] = report.outlier_proportion;
        out["valid_throughput"] = report.valid_throughput;
        out["threshold_ns"] = report.threshold.ns();
        return out;
      },
      py::arg("trace"), py::arg("threshold_ns"));
  m.def(
      "valid_throughput",
      [](const LatencyTrace& trace, int64_t threshold_ns) {
        return valid_throughput(trace, OutlierThreshold(threshold_ns));
      },
      py::arg("trace"), py::arg("threshold_ns"));
  m.def("percentile", &percentile, py::arg("trace"), py::arg("p"));
  m.def("tail_latency", &tail_latency, py::arg("trace"), py::arg("n"));

  m.def("service_outlier", &amplification::service_outlier, py::arg("op"), py::arg("sc"));
  m.def("service_outlier_virtualized", &amplification::service_outlier_virtualized,
        py::arg("op"), py::arg("sc"), py::arg("k"));
  m.def("required_single_server_outlier", &amplification::required_single_server_outlier,
        py::arg("target"), py::arg("sc"), py::arg("k") = 1);
  m.def("reduction_factor", &amplification::reduction_factor, py::arg("measured_op"),
        py::arg("target"), py::arg("sc"), py::arg("k") = 1);

  m.def(
      "simulate_fanout",
      [](const std::string& dist, uint64_t sc, uint64_t k, uint64_t trials, uint64_t seed,
         uint32_t replicas, double reissue_after_s, double corr_prob, double corr_mult,
         unsigned threads) {
        FanoutConfig config;
        config.leaf = parse_distribution(dist);
        config.servers = sc;
        config.requests_per_server = k;
        config.trials = trials;
        config.seed = seed;
        config.mitigation.replication = replicas;
        if (reissue_after_s >= 0) {
          config.mitigation.reissue = true;
          config.mitigation.reissue_delay = reissue_after_s;
        }
        config.correlation.probability = corr_prob;
        config.correlation.multiplier = corr_mult;
        config.threads = threads;
        SimulationResult result = [&] {
          py::gil_scoped_release release;
          return simulate_fanout(config);
        }();
        py::dict out;
        out["service_latencies"] = result.service_latencies();
        out["attempts"] = result.attempts();
        out["mean"] = result.mean();
        out["mean_attempts"] = result.mean_attempts();
        return out;
      },
      py::arg("dist"), py::arg("sc"), py::arg("k") = 1, py::arg("trials") = 100000,
      py::arg("seed") = 1, py::arg("replicas") = 1, py::arg("reissue_after_s") = -1.0,
      py::arg("corr_prob") = 0.0, py::arg("corr_mult") = 1.0, py::arg("threads") = 0,
      "Monte Carlo fan-out; dist is a spec string like 'split:100us,10ms,0.05'.");

  m.def("parse_duration_ns", &parse_duration_ns, py::arg("text"));
  m.def("format_duration_ns", &format_duration_ns, py::arg("ns"));
  m.def("trace_to_csv", &trace_to_csv, py::arg("trace"));
  m.def("trace_from_csv", [](const std::string& text) { return trace_from_csv(text); },
        py::arg("text"));
}
