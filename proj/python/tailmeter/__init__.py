"""Tail-latency toolkit: outlier-proportion metrics, fan-out amplification
math, and a Monte Carlo fan-out simulator backed by the C++ core."""

from tailmeter._core import (
    LatencyTrace,
    format_duration_ns,
    outlier_proportion,
    parse_duration_ns,
    percentile,
    reduction_factor,
    required_single_server_outlier,
    service_outlier,
    service_outlier_virtualized,
    simulate_fanout,
    tail_latency,
    trace_from_csv,
    trace_to_csv,
    valid_throughput,
)

__all__ = [
    "LatencyTrace",
    "format_duration_ns",
    "outlier_proportion",
    "parse_duration_ns",
    "percentile",
    "reduction_factor",
    "required_single_server_outlier",
    "service_outlier",
    "service_outlier_virtualized",
    "simulate_fanout",
    "tail_latency",
    "trace_from_csv",
    "trace_to_csv",
    "valid_throughput",
]
