#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "tailmeter/amplification.hpp"
#include "tailmeter/duration.hpp"
#include "tailmeter/rng.hpp"
#include "tailmeter/trace.hpp"
#include "tailmeter/trace_io.hpp"

using namespace tailmeter;

TEST_CASE("durations parse with a mandatory unit") {
  CHECK(parse_duration_ns("100us") == 100000);
  CHECK(parse_duration_ns("1ms") == 1000000);
  CHECK(parse_duration_ns("2.5ms") == 2500000);
  CHECK(parse_duration_ns("30s") == 30000000000LL);
  CHECK(parse_duration_ns("750ns") == 750);
  CHECK(parse_duration_ns("0ms") == 0);
  CHECK(parse_duration_ns("1e3us") == 1000000);

  CHECK_THROWS_AS(parse_duration_ns("100"), std::invalid_argument);
  CHECK_THROWS_AS(parse_duration_ns(" 1ms"), std::invalid_argument);
  CHECK_THROWS_AS(parse_duration_ns("ms"), std::invalid_argument);
  CHECK_THROWS_AS(parse_duration_ns(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_duration_ns("-1ms"), std::invalid_argument);
  CHECK_THROWS_AS(parse_duration_ns("1min"), std::invalid_argument);
  CHECK_THROWS_AS(parse_duration_ns("1 ms"), std::invalid_argument);
  CHECK_THROWS_AS(parse_duration_ns("1e30s"), std::invalid_argument);
}

TEST_CASE("durations format with the largest unit that keeps the value >= 1") {
  CHECK(format_duration_ns(750) == "750ns");
  CHECK(format_duration_ns(100000) == "100us");
  CHECK(format_duration_ns(2500000) == "2.5ms");
  CHECK(format_duration_ns(30000000000LL) == "30s");
  CHECK(format_duration_ns(0) == "0ns");
  // display formatting keeps 6 significant digits
  CHECK(format_duration_ns(123456789) == "123.457ms");
  CHECK(parse_duration_ns(format_duration_ns(123456)) == 123456);
}

TEST_CASE("trace csv round-trips every record exactly") {
  std::vector<LatencyRecord> records = {
      {0, 250000, RequestStatus::Ok},
      {1000000, 999, RequestStatus::Ok},
      {2000000, 1000000000, RequestStatus::Timeout},
      {2000000, 0, RequestStatus::Error},
      {9223372036854775806LL, 42, RequestStatus::Ok},
  };
  LatencyTrace trace(records);
  std::string csv = trace_to_csv(trace);
  CHECK(csv.substr(0, 26) == "send_ns,latency_ns,status\n");
  CHECK(trace_from_csv(csv) == trace);

  // through a file as well
  std::string path = "trace_roundtrip_test.csv";
  write_trace_csv(path, trace);
  CHECK(read_trace_csv(path) == trace);
  std::remove(path.c_str());
}

TEST_CASE("trace csv spells statuses in lower case") {
  LatencyTrace trace({{0, 1, RequestStatus::Ok},
                      {1, 2, RequestStatus::Error},
                      {2, 3, RequestStatus::Timeout}});
  CHECK(trace_to_csv(trace) ==
        "send_ns,latency_ns,status\n0,1,ok\n1,2,error\n2,3,timeout\n");
}

TEST_CASE("an empty trace is just the header") {
  CHECK(trace_to_csv(LatencyTrace{}) == "send_ns,latency_ns,status\n");
  CHECK(trace_from_csv("send_ns,latency_ns,status\n").empty());
  // CRLF and a missing final newline are tolerated
  CHECK(trace_from_csv("send_ns,latency_ns,status\r\n0,5,ok\r\n").size() == 1);
  CHECK(trace_from_csv("send_ns,latency_ns,status\n0,5,ok").size() == 1);
}

TEST_CASE("trace csv errors carry the line number") {
  CHECK_THROWS_AS(trace_from_csv(""), std::runtime_error);
  CHECK_THROWS_AS(trace_from_csv("wrong,header\n"), std::runtime_error);
  CHECK_THROWS_WITH(trace_from_csv("send_ns,latency_ns,status\n0,5\n"),
                    doctest::Contains("line 2"));
  CHECK_THROWS_WITH(trace_from_csv("send_ns,latency_ns,status\n0,5,ok\nx,5,ok\n"),
                    doctest::Contains("line 3"));
  CHECK_THROWS_WITH(trace_from_csv("send_ns,latency_ns,status\n0,5,meh\n"),
                    doctest::Contains("bad status"));
  CHECK_THROWS_WITH(trace_from_csv("send_ns,latency_ns,status\n0,5,ok,9\n"),
                    doctest::Contains("3 comma-separated fields"));
  // out-of-order send times are a data error, not accepted silently
  CHECK_THROWS_AS(trace_from_csv("send_ns,latency_ns,status\n5,1,ok\n0,1,ok\n"),
                  std::exception);
}

TEST_CASE("large random traces survive the text round trip") {
  Rng rng(42);
  std::vector<LatencyRecord> records;
  int64_t send = 0;
  for (int i = 0; i < 10000; ++i) {
    send += static_cast<int64_t>(rng.next_u64() % 1000000);
    auto status = static_cast<RequestStatus>(rng.next_u64() % 3);
    records.push_back({send, static_cast<int64_t>(rng.next_u64() % 2000000000), status});
  }
  LatencyTrace trace(std::move(records));
  CHECK(trace_from_csv(trace_to_csv(trace)) == trace);
}

TEST_CASE("tables render as csv") {
  ReportTable table;
  table.corner = "op\\sc";
  table.col_labels = {"1", "10", "100"};
  table.row_labels = {"0.001", "0.01"};
  table.cells = {{0.001, 0.00995511979025177, 0.09520784972385551},
                 {0.01, 0.09561792499119559, 0.63396765872677051}};
  std::string csv = table_to_csv(table);
  auto first_newline = csv.find('\n');
  CHECK(csv.substr(0, first_newline) == "op\\sc,1,10,100");
  CHECK(csv.find("0.01,0.095617924991195") != std::string::npos);
  // %.17g output reparses to the identical double
  CHECK(std::stod("0.095617924991195590") == 0.09561792499119559);
}

TEST_CASE("tables render as gnuplot blocks") {
  ReportTable table;
  table.corner = "x";
  table.col_labels = {"1", "2"};
  table.row_labels = {"a", "b", "c"};
  table.cells = {{1.5, 2.5}, {3.5, 4.5}, {5.5, 6.5}};
  std::string plot = table_to_gnuplot(table);
  CHECK(plot ==
        "# a\n1 1.5\n2 2.5\n"
        "\n# b\n1 3.5\n2 4.5\n"
        "\n# c\n1 5.5\n2 6.5\n");
}

TEST_CASE("text files round-trip bytes and report open failures") {
  std::string path = "text_roundtrip_test.txt";
  std::string content("line1\r\nbinary\0byte", 18);
  write_text_file(path, content);
  CHECK(read_text_file(path) == content);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_text_file("definitely_missing_file.txt"), std::runtime_error);
  CHECK_THROWS_AS(write_text_file("no_such_dir/x.txt", "x"), std::runtime_error);
}
