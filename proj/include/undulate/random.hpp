#pragma once

#include <cstdint>
#include <random>

namespace undulate {

// Portable uniform draws: std::mt19937_64 output is fixed by the standard,
// unlike std::uniform_real_distribution, so fields are identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace undulate
