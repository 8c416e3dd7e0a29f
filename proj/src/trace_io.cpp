#include "tailmeter/trace_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace tailmeter {

namespace {

constexpr std::string_view kTraceHeader = "send_ns,latency_ns,status";

std::string format_cell(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int64_t parse_i64(std::string_view field, size_t line_no, const char* what) {
  int64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw std::runtime_error("trace line " + std::to_string(line_no) + ": bad " + what);
  }
  return value;
}

}  // namespace

std::string trace_to_csv(const LatencyTrace& trace) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const auto& rec : trace.records()) {
    out += std::to_string(rec.send_ns);
    out += ',';
    out += std::to_string(rec.latency_ns);
    out += ',';
    out += to_string(rec.status);
    out += '\n';
  }
  return out;
}

LatencyTrace trace_from_csv(std::string_view text) {
  std::vector<LatencyRecord> records;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;

    if (line_no == 1) {
      if (line != kTraceHeader) {
        throw std::runtime_error("trace CSV must start with \"" + std::string(kTraceHeader) +
                                 "\"");
      }
      continue;
    }
    if (line.empty()) continue;

    size_t c1 = line.find(',');
    size_t c2 = c1 == std::string_view::npos ? std::string_view::npos : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos) {
      throw std::runtime_error("trace line " + std::to_string(line_no) +
                               ": expected 3 comma-separated fields");
    }
    LatencyRecord rec;
    rec.send_ns = parse_i64(line.substr(0, c1), line_no, "send_ns");
    rec.latency_ns = parse_i64(line.substr(c1 + 1, c2 - c1 - 1), line_no, "latency_ns");
    try {
      rec.status = status_from_string(line.substr(c2 + 1));
    } catch (const std::exception&) {
      throw std::runtime_error("trace line " + std::to_string(line_no) + ": bad status");
    }
    records.push_back(rec);
  }
  if (line_no == 0) throw std::runtime_error("trace CSV is empty");
  return LatencyTrace(std::move(records));
}

void write_trace_csv(const std::string& path, const LatencyTrace& trace) {
  write_text_file(path, trace_to_csv(trace));
}

LatencyTrace read_trace_csv(const std::string& path) {
  return trace_from_csv(read_text_file(path));
}

std::string table_to_csv(const ReportTable& table) {
  std::string out = table.corner;
  for (const auto& col : table.col_labels) {
    out += ',';
    out += col;
  }
  out += '\n';
  for (size_t r = 0; r < table.cells.size(); ++r) {
    out += table.row_labels[r];
    for (double cell : table.cells[r]) {
      out += ',';
      out += format_cell(cell);
    }
    out += '\n';
  }
  return out;
}

std::string table_to_gnuplot(const ReportTable& table) {
  std::string out;
  for (size_t r = 0; r < table.cells.size(); ++r) {
    if (r > 0) out += '\n';
    out += "# ";
    out += table.row_labels[r];
    out += '\n';
    for (size_t c = 0; c < table.cells[r].size(); ++c) {
      out += table.col_labels[c];
      out += ' ';
      out += format_cell(table.cells[r][c]);
      out += '\n';
    }
  }
  return out;
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  file.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!file) throw std::runtime_error("write to " + path + " failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return std::move(buffer).str();
}

}  // namespace tailmeter
