#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace tailmeter {

/// Parses "250ms", "10us", "1.5s", "800ns" into nanoseconds. The unit suffix
/// is mandatory; a bare number is rejected so that callers never guess at
/// units. Throws std::invalid_argument on malformed input or negative values.
int64_t parse_duration_ns(std::string_view text);

/// Renders nanoseconds with the largest unit that keeps the value >= 1,
/// e.g. 1500000 -> "1.5ms".
std::string format_duration_ns(int64_t ns);

}  // namespace tailmeter
