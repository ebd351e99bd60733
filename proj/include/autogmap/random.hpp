#pragma once

#include <cstdint>
#include <random>

namespace autogmap {

// Seeded generator with a portable uniform draw. std::uniform_real_distribution
// is implementation-defined, so draws are formed directly from the top 53 bits
// of mt19937_64 to keep sampled traces identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace autogmap
