#pragma once

#include <string>
#include <string_view>

#include "tailmeter/amplification.hpp"
#include "tailmeter/trace.hpp"

namespace tailmeter {

/// Trace CSV: a "send_ns,latency_ns,status" header, then one row per record,
/// LF line endings. status is ok, error, or timeout. Round-trips exactly.
std::string trace_to_csv(const LatencyTrace& trace);
LatencyTrace trace_from_csv(std::string_view text);

void write_trace_csv(const std::string& path, const LatencyTrace& trace);
LatencyTrace read_trace_csv(const std::string& path);

/// Table CSV: "corner,col...," header then "row_label,cell..." rows. Cell
/// values are printed with %.17g so they survive a round trip through text.
std::string table_to_csv(const ReportTable& table);

/// gnuplot-friendly rendering: one block per table row, separated by blank
/// lines, each opened by a "# row_label" comment and holding "col value"
/// pairs. Feed it to plot "..." index N using 1:2.
std::string table_to_gnuplot(const ReportTable& table);

void write_text_file(const std::string& path, std::string_view content);
std::string read_text_file(const std::string& path);

}  // namespace tailmeter
