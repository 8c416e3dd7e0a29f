#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tailmeter/rng.hpp"

namespace tailmeter {

/// A latency distribution sampled in seconds. Implementations must return
/// non-negative values and be safe to sample from multiple threads as long
/// as each thread brings its own Rng.
class Distribution {
 public:
  virtual ~Distribution() = default;
  virtual double sample(Rng& rng) const = 0;
  virtual std::string describe() const = 0;
};

using DistributionPtr = std::shared_ptr<const Distribution>;

/// Degenerate point mass. value >= 0 (zero is useful for a no-delay server).
DistributionPtr make_constant(double value);

/// mean > 0.
DistributionPtr make_exponential(double mean);

/// Parameterised by the median and the sigma of the underlying normal,
/// which is how heavy-tailed service times are usually quoted. median > 0,
/// sigma >= 0.
DistributionPtr make_lognormal(double median, double sigma);

/// scale > 0, shape > 0. Samples scale * u^(-1/shape), so the minimum is
/// scale and the tail index is shape.
DistributionPtr make_pareto(double scale, double shape);

/// Draws uniformly from the given samples. Must be non-empty, all >= 0.
DistributionPtr make_empirical(std::vector<double> samples);

/// Bimodal: with probability slow_probability returns slow, else fast.
/// 0 <= fast <= slow, slow_probability in [0, 1].
DistributionPtr make_bernoulli_split(double fast, double slow, double slow_probability);

}  // namespace tailmeter
