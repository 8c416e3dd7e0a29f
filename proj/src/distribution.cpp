#include "tailmeter/distribution.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace tailmeter {

namespace {

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

class Constant final : public Distribution {
 public:
  explicit Constant(double value) : value_(value) {
    if (!(value >= 0)) throw std::invalid_argument("constant delay must be >= 0");
  }
  double sample(Rng&) const override { return value_; }
  std::string describe() const override { return fmt("constant(%g)", value_); }

 private:
  double value_;
};

class Exponential final : public Distribution {
 public:
  explicit Exponential(double mean) : mean_(mean) {
    if (!(mean > 0)) throw std::invalid_argument("exponential mean must be > 0");
  }
  double sample(Rng& rng) const override { return -mean_ * std::log(rng.next_unit()); }
  std::string describe() const override { return fmt("exp(mean=%g)", mean_); }

 private:
  double mean_;
};

class LogNormal final : public Distribution {
 public:
  LogNormal(double median, double sigma) : log_median_(std::log(median)), sigma_(sigma) {
    if (!(median > 0)) throw std::invalid_argument("lognormal median must be > 0");
    if (!(sigma >= 0)) throw std::invalid_argument("lognormal sigma must be >= 0");
    median_ = median;
  }
  double sample(Rng& rng) const override {
    // Box-Muller; the second variate is discarded to keep sampling stateless.
    double u1 = rng.next_unit();
    double u2 = rng.next_unit();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return std::exp(log_median_ + sigma_ * z);
  }
  std::string describe() const override { return fmt("lognormal(median=%g, sigma=%g)", median_, sigma_); }

 private:
  double log_median_;
  double sigma_;
  double median_;
};

class Pareto final : public Distribution {
 public:
  Pareto(double scale, double shape) : scale_(scale), shape_(shape) {
    if (!(scale > 0)) throw std::invalid_argument("pareto scale must be > 0");
    if (!(shape > 0)) throw std::invalid_argument("pareto shape must be > 0");
  }
  double sample(Rng& rng) const override {
    return scale_ * std::pow(rng.next_unit(), -1.0 / shape_);
  }
  std::string describe() const override { return fmt("pareto(scale=%g, shape=%g)", scale_, shape_); }

 private:
  double scale_;
  double shape_;
};

class Empirical final : public Distribution {
 public:
  explicit Empirical(std::vector<double> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw std::invalid_argument("empirical distribution needs samples");
    for (double v : samples_) {
      if (!(v >= 0)) throw std::invalid_argument("empirical samples must be >= 0");
    }
  }
  double sample(Rng& rng) const override {
    // Unbiased-enough index via the multiply-shift trick; with 2^64 draws
    // against realistic sample counts the modulo bias is unmeasurable.
    auto idx = static_cast<size_t>(
        (static_cast<unsigned __int128>(rng.next_u64()) * samples_.size()) >> 64);
    return samples_[idx];
  }
  std::string describe() const override {
    return fmt("empirical(n=%g)", static_cast<double>(samples_.size()));
  }

 private:
  std::vector<double> samples_;
};

class BernoulliSplit final : public Distribution {
 public:
  BernoulliSplit(double fast, double slow, double slow_probability)
      : fast_(fast), slow_(slow), p_(slow_probability) {
    if (!(fast >= 0) || !(slow >= fast)) {
      throw std::invalid_argument("split needs 0 <= fast <= slow");
    }
    if (!(p_ >= 0) || !(p_ <= 1)) {
      throw std::invalid_argument("slow probability must be in [0, 1]");
    }
  }
  double sample(Rng& rng) const override { return rng.next_unit() <= p_ ? slow_ : fast_; }
  std::string describe() const override { return fmt("split(%g, %g, p=%g)", fast_, slow_, p_); }

 private:
  double fast_;
  double slow_;
  double p_;
};

}  // namespace

DistributionPtr make_constant(double value) { return std::make_shared<Constant>(value); }
DistributionPtr make_exponential(double mean) { return std::make_shared<Exponential>(mean); }
DistributionPtr make_lognormal(double median, double sigma) {
  return std::make_shared<LogNormal>(median, sigma);
}
DistributionPtr make_pareto(double scale, double shape) {
  return std::make_shared<Pareto>(scale, shape);
}
DistributionPtr make_empirical(std::vector<double> samples) {
  return std::make_shared<Empirical>(std::move(samples));
}
DistributionPtr make_bernoulli_split(double fast, double slow, double slow_probability) {
  return std::make_shared<BernoulliSplit>(fast, slow, slow_probability);
}

}  // namespace tailmeter
