#pragma once

#include <cstdint>

namespace tailmeter {

/// SplitMix64. Small, fast, and trivially splittable: fold() derives an
/// independent stream key from a parent seed and an index, which is how the
/// simulator gives every trial and every sub-request its own stream without
/// any cross-thread coordination.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  /// Uniform in (0, 1]. Never returns 0, so log(u) is always finite.
  double next_unit() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  static uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  static uint64_t fold(uint64_t key, uint64_t index) {
    return mix64(key + kGolden * (index + 1));
  }

 private:
  static constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;
  uint64_t state_;
};

}  // namespace tailmeter
