#include <cmath>
#include <csignal>
#include <ctime>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tailmeter/amplification.hpp"
#include "tailmeter/dist_spec.hpp"
#include "tailmeter/duration.hpp"
#include "tailmeter/fanout_sim.hpp"
#include "tailmeter/loadgen.hpp"
#include "tailmeter/metrics.hpp"
#include "tailmeter/mock_server.hpp"
#include "tailmeter/trace_io.hpp"

namespace {

using namespace tailmeter;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string display(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void print_table(const ReportTable& table) {
  std::printf("%s", table.corner.c_str());
  for (const auto& col : table.col_labels) std::printf(" %s", col.c_str());
  std::printf("\n");
  for (size_t r = 0; r < table.cells.size(); ++r) {
    std::printf("%s", table.row_labels[r].c_str());
    for (double cell : table.cells[r]) std::printf(" %s", display(cell).c_str());
    std::printf("\n");
  }
}

void write_table_outputs(const ReportTable& table, const std::string& csv_path,
                         const std::string& plot_path) {
  if (!csv_path.empty()) write_text_file(csv_path, table_to_csv(table));
  if (!plot_path.empty()) write_text_file(plot_path, table_to_gnuplot(table));
}

// "host:port" -> (host, port)
std::pair<std::string, uint16_t> parse_target(const std::string& target) {
  size_t colon = target.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == target.size()) {
    throw std::invalid_argument("--target must look like host:port");
  }
  int port = 0;
  try {
    port = std::stoi(target.substr(colon + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("--target port is not a number");
  }
  if (port < 1 || port > 65535) throw std::invalid_argument("--target port out of range");
  return {target.substr(0, colon), static_cast<uint16_t>(port)};
}

// "100us:1000us:100us" -> {100us, 200us, ..., 1000us}
std::vector<int64_t> expand_sweep(const std::string& spec) {
  size_t c1 = spec.find(':');
  size_t c2 = c1 == std::string::npos ? std::string::npos : spec.find(':', c1 + 1);
  if (c2 == std::string::npos || spec.find(':', c2 + 1) != std::string::npos) {
    throw std::invalid_argument("--sweep must look like START:END:STEP, e.g. 100us:1000us:100us");
  }
  int64_t start = parse_duration_ns(spec.substr(0, c1));
  int64_t end = parse_duration_ns(spec.substr(c1 + 1, c2 - c1 - 1));
  int64_t step = parse_duration_ns(spec.substr(c2 + 1));
  if (start <= 0 || step <= 0 || end < start) {
    throw std::invalid_argument("--sweep needs START >= 1ns, STEP >= 1ns, END >= START");
  }
  std::vector<int64_t> points;
  for (int64_t t = start; t <= end; t += step) points.push_back(t);
  return points;
}

struct ThresholdFlags {
  std::vector<std::string> thresholds;
  std::string sweep;

  std::vector<int64_t> resolve() const {
    std::vector<int64_t> out;
    if (!sweep.empty()) out = expand_sweep(sweep);
    for (const auto& text : thresholds) out.push_back(parse_duration_ns(text));
    return out;
  }
};

ReportTable proportion_table(const LatencyTrace& trace, const std::vector<int64_t>& thresholds) {
  std::vector<OutlierThreshold> list;
  list.reserve(thresholds.size());
  for (int64_t t : thresholds) list.emplace_back(t);
  std::vector<OutlierReport> reports = sweep(trace, list);

  ReportTable table;
  table.corner = "metric\\threshold";
  for (int64_t t : thresholds) table.col_labels.push_back(format_duration_ns(t));
  table.row_labels = {"outlier_proportion", "valid_throughput"};
  table.cells.resize(2);
  for (const auto& report : reports) {
    table.cells[0].push_back(report.outlier_proportion);
    table.cells[1].push_back(static_cast<double>(report.valid_throughput));
  }
  return table;
}

// ---------------------------------------------------------------- bench --

struct BenchFlags {
  std::string target;
  std::string mock_dist;
  uint64_t mock_seed = 1;
  WorkloadConfig workload;
  std::string timeout_text = "1s";
  std::string out_path;
};

int run_bench(BenchFlags& flags) {
  std::optional<MockServer> mock;
  if (!flags.mock_dist.empty()) {
    MockServerConfig mock_config;
    mock_config.delay = parse_distribution(flags.mock_dist);
    mock_config.seed = flags.mock_seed;
    mock.emplace(std::move(mock_config));
    mock->start();
    flags.workload.host = "127.0.0.1";
    flags.workload.port = mock->port();
    std::fprintf(stderr, "mock server on 127.0.0.1:%u\n", mock->port());
  } else {
    auto [host, port] = parse_target(flags.target);
    flags.workload.host = host;
    flags.workload.port = port;
  }
  flags.workload.timeout = static_cast<double>(parse_duration_ns(flags.timeout_text)) / 1e9;

  LatencyTrace trace;
  bool partial = false;
  try {
    trace = run_benchmark(flags.workload);
  } catch (const BenchmarkError& e) {
    std::fprintf(stderr, "error: benchmark aborted: %s\n", e.what());
    trace = e.partial_trace();
    partial = true;
  }
  if (mock) mock->stop();

  if (!flags.out_path.empty() && (!trace.empty() || !partial)) {
    write_trace_csv(flags.out_path, trace);
    std::fprintf(stderr, "%s %zu records -> %s\n", partial ? "partial trace," : "wrote",
                 trace.size(), flags.out_path.c_str());
  }
  if (partial) return kExitRuntime;

  std::printf("records %zu\n", trace.size());
  if (!trace.empty()) {
    std::printf("p50 %s\n", format_duration_ns(percentile(trace, 0.50)).c_str());
    std::printf("p99 %s\n", format_duration_ns(percentile(trace, 0.99)).c_str());
  }
  return kExitOk;
}

// -------------------------------------------------------------- analyze --

struct AnalyzeFlags {
  std::string trace_path;
  ThresholdFlags thresholds;
  std::vector<double> tails;
  std::vector<double> percentiles;
  std::string table_out;
  std::string plot_out;
};

int run_analyze(const AnalyzeFlags& flags) {
  std::vector<int64_t> thresholds = flags.thresholds.resolve();
  if (thresholds.empty() && flags.tails.empty() && flags.percentiles.empty()) {
    std::fprintf(stderr, "error: nothing to compute; pass --threshold, --sweep, --tail, or "
                         "--percentile\n");
    return kExitUsage;
  }
  LatencyTrace trace = read_trace_csv(flags.trace_path);

  std::printf("records %zu\n", trace.size());
  uint64_t failed = 0;
  for (const auto& rec : trace.records()) {
    if (rec.status != RequestStatus::Ok) ++failed;
  }
  std::printf("failed %llu\n", static_cast<unsigned long long>(failed));

  for (double p : flags.percentiles) {
    std::printf("p%s %s\n", display(p * 100).c_str(),
                format_duration_ns(percentile(trace, p)).c_str());
  }
  for (double n : flags.tails) {
    double mean_ns = tail_latency(trace, n);
    std::printf("tail %s %s\n", display(n).c_str(),
                format_duration_ns(static_cast<int64_t>(std::llround(mean_ns))).c_str());
  }
  if (!thresholds.empty()) {
    ReportTable table = proportion_table(trace, thresholds);
    print_table(table);
    write_table_outputs(table, flags.table_out, flags.plot_out);
  }
  return kExitOk;
}

// -------------------------------------------------------------- amplify --

struct AmplifyFlags {
  std::vector<double> ops;
  std::vector<double> targets;
  std::vector<uint64_t> fanouts;
  uint64_t k = 1;
  std::string table_out;
  std::string plot_out;
};

int run_amplify(const AmplifyFlags& flags) {
  if (flags.ops.empty() && flags.targets.empty()) {
    std::fprintf(stderr, "error: pass --op (forward), --op-sj (budget), or --op with "
                         "--target (reduction factor)\n");
    return kExitUsage;
  }

  ReportTable table;
  if (!flags.ops.empty() && !flags.targets.empty()) {
    if (flags.ops.size() != 1) {
      std::fprintf(stderr, "error: reduction factor takes exactly one --op\n");
      return kExitUsage;
    }
    table.corner = "fanout\\target";
    for (uint64_t sc : flags.fanouts) table.row_labels.push_back(std::to_string(sc));
    for (double t : flags.targets) table.col_labels.push_back(display(t));
    for (uint64_t sc : flags.fanouts) {
      std::vector<double> row;
      for (double t : flags.targets) {
        row.push_back(amplification::reduction_factor(flags.ops[0], t, sc, flags.k));
      }
      table.cells.push_back(std::move(row));
    }
  } else if (!flags.targets.empty()) {
    table = budget_table(flags.fanouts, flags.targets, flags.k);
  } else {
    table = amplification_table(flags.fanouts, flags.ops, flags.k);
  }

  if (table.cells.size() == 1 && table.cells[0].size() == 1) {
    std::printf("%s\n", display(table.cells[0][0]).c_str());
  } else {
    print_table(table);
  }
  write_table_outputs(table, flags.table_out, flags.plot_out);
  return kExitOk;
}

// ------------------------------------------------------------- simulate --

struct SimulateFlags {
  std::string dist;
  FanoutConfig config;
  uint32_t replicas = 1;
  std::string reissue_after;
  ThresholdFlags thresholds;
  std::string out_path;
  std::string table_out;
  std::string plot_out;
};

int run_simulate(SimulateFlags& flags) {
  flags.config.leaf = parse_distribution(flags.dist);
  flags.config.mitigation.replication = flags.replicas;
  if (!flags.reissue_after.empty()) {
    flags.config.mitigation.reissue = true;
    flags.config.mitigation.reissue_delay =
        static_cast<double>(parse_duration_ns(flags.reissue_after)) / 1e9;
  }

  SimulationResult result = simulate_fanout(flags.config);

  std::printf("trials %llu\n", static_cast<unsigned long long>(result.trials()));
  std::printf("mean %ss\n", display(result.mean()).c_str());
  std::printf("p50 %ss\n", display(result.percentile(0.50)).c_str());
  std::printf("p99 %ss\n", display(result.percentile(0.99)).c_str());
  std::printf("mean_attempts %s\n", display(result.mean_attempts()).c_str());

  std::vector<int64_t> thresholds = flags.thresholds.resolve();
  if (!thresholds.empty()) {
    ReportTable table;
    table.corner = "metric\\threshold";
    table.row_labels = {"outlier_proportion"};
    table.cells.resize(1);
    for (int64_t t : thresholds) {
      table.col_labels.push_back(format_duration_ns(t));
      table.cells[0].push_back(result.outlier_proportion(static_cast<double>(t) / 1e9));
    }
    print_table(table);
    write_table_outputs(table, flags.table_out, flags.plot_out);
  }
  if (!flags.out_path.empty()) {
    write_trace_csv(flags.out_path, to_trace(result));
  }
  return kExitOk;
}

// ----------------------------------------------------------- mock-serve --

volatile std::sig_atomic_t g_stop_requested = 0;

void handle_stop_signal(int) { g_stop_requested = 1; }

struct MockServeFlags {
  uint16_t port = 0;
  std::string delay;
  uint64_t seed = 1;
  uint64_t capacity = 1u << 16;
  uint64_t max_value_bytes = 1u << 20;
};

int run_mock_serve(const MockServeFlags& flags) {
  MockServerConfig config;
  config.port = flags.port;
  if (!flags.delay.empty()) config.delay = parse_distribution(flags.delay);
  config.seed = flags.seed;
  config.max_items = flags.capacity;
  config.max_value_bytes = flags.max_value_bytes;

  MockServer server(std::move(config));
  server.start();
  std::printf("listening on 127.0.0.1:%u\n", server.port());
  std::fflush(stdout);

  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
  while (!g_stop_requested) {
    timespec nap{0, 50'000'000};
    nanosleep(&nap, nullptr);
  }
  server.stop();
  std::printf("served %llu requests\n",
              static_cast<unsigned long long>(server.requests_served()));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tail-latency toolkit: measure, analyze, and model outlier proportions"};
  app.require_subcommand(1);

  BenchFlags bench_flags;
  auto* bench = app.add_subcommand("bench", "Run an open-loop workload and record a trace");
  auto* target_opt =
      bench->add_option("--target", bench_flags.target, "Server to drive, host:port");
  auto* mock_opt = bench->add_option("--mock", bench_flags.mock_dist,
                                     "Self-host a mock server with this delay distribution");
  target_opt->excludes(mock_opt);
  mock_opt->excludes(target_opt);
  bench->add_option("--mock-seed", bench_flags.mock_seed, "Mock server delay seed");
  bench->add_option("--rate", bench_flags.workload.rate, "Requests per second")
      ->check(CLI::PositiveNumber);
  bench->add_option("--duration", bench_flags.workload.duration,
                    "Total run seconds, warmup included")
      ->check(CLI::PositiveNumber);
  bench->add_option("--warmup", bench_flags.workload.warmup,
                    "Leading seconds excluded from the trace")
      ->check(CLI::NonNegativeNumber);
  bench->add_option("--connections", bench_flags.workload.connections, "Client connections")
      ->check(CLI::PositiveNumber);
  bench->add_option("--pipeline", bench_flags.workload.pipeline_depth,
                    "Max in-flight requests per connection")
      ->check(CLI::PositiveNumber);
  bench->add_option("--get-fraction", bench_flags.workload.get_fraction,
                    "Fraction of gets vs sets")
      ->check(CLI::Range(0.0, 1.0));
  bench->add_option("--keys", bench_flags.workload.key_count, "Key space size")
      ->check(CLI::PositiveNumber);
  bench->add_option("--value-bytes", bench_flags.workload.value_bytes, "Set payload size");
  bench->add_option("--timeout", bench_flags.timeout_text,
                    "Per-request timeout (duration, e.g. 500ms)");
  bench->add_option("--seed", bench_flags.workload.seed, "Workload mix seed");
  bench->add_option("--out", bench_flags.out_path, "Trace CSV output path");

  AnalyzeFlags analyze_flags;
  auto* analyze = app.add_subcommand("analyze", "Compute outlier metrics from a trace CSV");
  analyze->add_option("--trace", analyze_flags.trace_path, "Trace CSV to read")->required();
  analyze->add_option("--threshold", analyze_flags.thresholds.thresholds,
                      "Outlier threshold (duration, repeatable)");
  analyze->add_option("--sweep", analyze_flags.thresholds.sweep,
                      "Threshold sweep START:END:STEP, e.g. 100us:1000us:100us");
  analyze->add_option("--tail", analyze_flags.tails,
                      "Tail percentile in (0,1): mean latency beyond it (repeatable)")
      ->check(CLI::Range(1e-9, 0.999999999));
  analyze->add_option("--percentile", analyze_flags.percentiles,
                      "Nearest-rank percentile in (0,1] (repeatable)")
      ->check(CLI::Range(1e-9, 1.0));
  analyze->add_option("--table-out", analyze_flags.table_out, "Write the sweep table as CSV");
  analyze->add_option("--plot-out", analyze_flags.plot_out,
                      "Write the sweep table as gnuplot blocks");

  AmplifyFlags amplify_flags;
  auto* amplify = app.add_subcommand("amplify", "Closed-form fan-out amplification math");
  amplify->add_option("--op", amplify_flags.ops,
                      "Per-leaf outlier proportion (repeatable; forward model)")
      ->check(CLI::Range(0.0, 1.0));
  amplify->add_option("--op-sj", amplify_flags.targets,
                      "Service-level target proportion (repeatable; inverse budget)")
      ->check(CLI::Range(0.0, 1.0));
  amplify
      ->add_option("--target", amplify_flags.targets,
                   "Target proportion for reduction factor (with --op)")
      ->check(CLI::Range(0.0, 1.0));
  amplify->add_option("--sc", amplify_flags.fanouts, "Leaf server count (repeatable)")
      ->required()
      ->check(CLI::PositiveNumber);
  amplify->add_option("--k", amplify_flags.k, "Instances per server")
      ->check(CLI::PositiveNumber);
  amplify->add_option("--table-out", amplify_flags.table_out, "Write the table as CSV");
  amplify->add_option("--plot-out", amplify_flags.plot_out, "Write gnuplot blocks");

  SimulateFlags simulate_flags;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo fan-out simulation");
  simulate->add_option("--dist", simulate_flags.dist, "Leaf latency distribution spec")
      ->required();
  simulate->add_option("--sc", simulate_flags.config.servers, "Leaf server count")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--k", simulate_flags.config.requests_per_server,
                       "Instances per server")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--trials", simulate_flags.config.trials, "Trial count")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--seed", simulate_flags.config.seed, "RNG seed");
  simulate->add_option("--replicas", simulate_flags.replicas,
                       "Replicas per sub-request, fastest wins")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--reissue-after", simulate_flags.reissue_after,
                       "Duplicate a sub-request after this long (duration)");
  simulate->add_option("--corr-prob", simulate_flags.config.correlation.probability,
                       "Probability of a trial-wide slowdown")
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--corr-mult", simulate_flags.config.correlation.multiplier,
                       "Latency multiplier when the slowdown fires")
      ->check(CLI::Range(1.0, 1e12));
  simulate->add_option("--threads", simulate_flags.config.threads,
                       "Worker threads (0 = hardware)");
  simulate->add_option("--threshold", simulate_flags.thresholds.thresholds,
                       "Outlier threshold (duration, repeatable)");
  simulate->add_option("--sweep", simulate_flags.thresholds.sweep,
                       "Threshold sweep START:END:STEP");
  simulate->add_option("--out", simulate_flags.out_path, "Service-level trace CSV path");
  simulate->add_option("--table-out", simulate_flags.table_out, "Write the table as CSV");
  simulate->add_option("--plot-out", simulate_flags.plot_out, "Write gnuplot blocks");

  MockServeFlags mock_flags;
  auto* mock_serve = app.add_subcommand("mock-serve", "Run the delay-injecting mock server");
  mock_serve->add_option("--port", mock_flags.port, "Listen port (0 = ephemeral)");
  mock_serve->add_option("--delay", mock_flags.delay, "Injected delay distribution spec");
  mock_serve->add_option("--seed", mock_flags.seed, "Delay sampling seed");
  mock_serve->add_option("--capacity", mock_flags.capacity, "Store entry capacity")
      ->check(CLI::PositiveNumber);
  mock_serve->add_option("--max-value-bytes", mock_flags.max_value_bytes,
                         "Largest accepted value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*bench) {
      if (bench_flags.target.empty() && bench_flags.mock_dist.empty()) {
        std::fprintf(stderr, "error: bench needs --target or --mock\n");
        return kExitUsage;
      }
      return run_bench(bench_flags);
    }
    if (*analyze) return run_analyze(analyze_flags);
    if (*amplify) return run_amplify(amplify_flags);
    if (*simulate) return run_simulate(simulate_flags);
    if (*mock_serve) return run_mock_serve(mock_flags);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
