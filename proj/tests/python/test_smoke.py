"""Smoke test for the tailmeter python package: one pass over every binding."""

import tailmeter as tm


def test_trace_and_metrics():
    trace = tm.LatencyTrace([50000, 150000, 90000, 200000])
    assert len(trace) == 4
    assert sorted(trace.latencies()) == [50000, 90000, 150000, 200000]

    report = tm.outlier_proportion(trace, 100000)
    assert report["n_total"] == 4
    assert report["m_outliers"] == 2
    assert report["m_failed"] == 0
    assert report["outlier_proportion"] == 0.5
    assert report["valid_throughput"] == 2
    assert report["threshold_ns"] == 100000
    assert tm.valid_throughput(trace, 100000) == 2

    assert tm.percentile(trace, 0.5) == 90000
    assert tm.percentile(trace, 1.0) == 200000
    assert tm.tail_latency(trace, 0.5) == (150000 + 200000) / 2

    failed = tm.LatencyTrace.from_records(
        [(0, 50000, "ok"), (1000, 50000, "timeout"), (2000, 50000, "error")]
    )
    report = tm.outlier_proportion(failed, 100000)
    assert report["m_outliers"] == 2
    assert report["m_failed"] == 2


def test_amplification():
    assert tm.service_outlier(0.5, 2) == 0.75
    assert tm.service_outlier_virtualized(0.5, 1, 2) == 0.75
    assert abs(tm.service_outlier(0.01, 100) - 0.63397) < 1e-5

    budget = tm.required_single_server_outlier(0.10, 10000)
    assert abs(budget - 1.0535996061786263e-05) < 1e-18

    round_trip = tm.required_single_server_outlier(tm.service_outlier(1e-4, 100), 100)
    assert abs(round_trip - 1e-4) / 1e-4 < 1e-12

    factor = tm.reduction_factor(0.0909, 0.10, 1000)
    assert abs(factor - 862.797) < 1e-3

    try:
        tm.required_single_server_outlier(1.0, 10)
    except ValueError:
        pass
    else:
        raise AssertionError("target 1.0 must be rejected")


def test_simulation():
    result = tm.simulate_fanout("split:50us,200us,0.01", sc=10, trials=100000, seed=1)
    latencies = result["service_latencies"]
    assert len(latencies) == 100000
    assert result["attempts"] == [10] * 100000
    assert result["mean_attempts"] == 10.0

    op = sum(1 for s in latencies if s > 100e-6) / len(latencies)
    assert abs(op - 0.09562) < 0.004  # > 4 binomial sigma

    again = tm.simulate_fanout("split:50us,200us,0.01", sc=10, trials=100000, seed=1, threads=4)
    assert again["service_latencies"] == latencies

    hedged = tm.simulate_fanout(
        "lognormal:1ms,1.5", sc=5, trials=2000, seed=3, reissue_after_s=2e-3
    )
    base = tm.simulate_fanout("lognormal:1ms,1.5", sc=5, trials=2000, seed=3)
    assert all(
        h <= b for h, b in zip(hedged["service_latencies"], base["service_latencies"])
    )


def test_io():
    trace = tm.LatencyTrace.from_records(
        [(0, 250000, "ok"), (1000, 1, "timeout"), (2000, 9, "error")]
    )
    text = tm.trace_to_csv(trace)
    assert text.startswith("send_ns,latency_ns,status\n")
    assert tm.trace_from_csv(text) == trace
    assert tm.trace_from_csv(text).records() == trace.records()

    assert tm.parse_duration_ns("1.5ms") == 1500000
    assert tm.format_duration_ns(250000) == "250us"


def main():
    test_trace_and_metrics()
    test_amplification()
    test_simulation()
    test_io()
    print("python smoke: all checks passed")


if __name__ == "__main__":
    main()
