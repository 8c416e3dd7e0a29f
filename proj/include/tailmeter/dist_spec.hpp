#pragma once

#include <string_view>

#include "tailmeter/distribution.hpp"

namespace tailmeter {

/// Builds a Distribution from a compact spec string:
///
///   constant:250us
///   exp:1ms                 (mean)
///   lognormal:1ms,2.5       (median, sigma)
///   pareto:100us,1.2        (scale, shape)
///   split:100us,50ms,0.01   (fast, slow, P(slow))
///   empirical:path.txt      (one sample per line: 1.2ms, or plain seconds)
///
/// Time-valued parameters need a unit suffix (ns/us/ms/s). Throws
/// std::invalid_argument with a usage hint on malformed specs.
DistributionPtr parse_distribution(std::string_view spec);

}  // namespace tailmeter
