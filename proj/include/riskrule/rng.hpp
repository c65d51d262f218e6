#pragma once

#include <cstdint>
#include <random>

namespace riskrule {

// Seedable generator used by every randomized routine in the library.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Conversions to doubles and bounded integers are done here rather
// than through <random> distributions, whose algorithms are
// implementation-defined, so streams are identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01();

  // Uniform on [lo, hi).
  double uniform(double lo, double hi);

  // Uniform integer on {0, ..., n - 1}; n must be positive.
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace riskrule
