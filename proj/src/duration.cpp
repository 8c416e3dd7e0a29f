#include "tailmeter/duration.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace tailmeter {

namespace {

struct Unit {
  std::string_view suffix;
  double ns;
};

constexpr Unit kUnits[] = {
    {"ns", 1.0},
    {"us", 1e3},
    {"ms", 1e6},
    {"s", 1e9},
};

}  // namespace

int64_t parse_duration_ns(std::string_view text) {
  auto fail = [&] {
    throw std::invalid_argument("expected a duration like 250ms, 10us, 1.5s; got \"" +
                                std::string(text) + "\"");
  };

  size_t unit_start = text.size();
  while (unit_start > 0 && std::isalpha(static_cast<unsigned char>(text[unit_start - 1]))) {
    --unit_start;
  }
  if (unit_start == text.size() || unit_start == 0) fail();
  std::string_view number = text.substr(0, unit_start);
  std::string_view suffix = text.substr(unit_start);

  double scale = 0;
  for (const Unit& u : kUnits) {
    if (suffix == u.suffix) {
      scale = u.ns;
      break;
    }
  }
  if (scale == 0) fail();

  double value = 0;
  auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
  if (ec != std::errc{} || ptr != number.data() + number.size()) fail();
  if (!(value >= 0) || !std::isfinite(value)) fail();

  double ns = value * scale;
  if (ns > 9.2e18) throw std::invalid_argument("duration overflows the nanosecond range");
  return std::llround(ns);
}

std::string format_duration_ns(int64_t ns) {
  const char* suffix = "ns";
  double value = static_cast<double>(ns);
  if (ns >= 1000000000) {
    suffix = "s";
    value = static_cast<double>(ns) / 1e9;
  } else if (ns >= 1000000) {
    suffix = "ms";
    value = static_cast<double>(ns) / 1e6;
  } else if (ns >= 1000) {
    suffix = "us";
    value = static_cast<double>(ns) / 1e3;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g%s", value, suffix);
  return buf;
}

}  // namespace tailmeter
