#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace parapde {

// Deterministic random stream built on std::mt19937_64. Gaussian and bounded
// integer draws are implemented directly on the raw 64-bit output (Box-Muller
// on 53-bit uniforms, rejection sampling for integers) so the value sequence
// is fixed by the seed alone, not by standard-library distribution internals.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal variate via Box-Muller.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  // Uniform integer in [0, bound), bound > 0, by rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("RandomStream::below: bound must be positive");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return x % bound;
    }
  }

  // Draws `count` distinct values from {0, ..., population-1} via a partial
  // Fisher-Yates shuffle. Order of the result is the draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t population, std::size_t count) {
    if (count > population)
      throw std::invalid_argument("sample_without_replacement: count exceeds population");
    std::vector<std::size_t> pool(population);
    for (std::size_t i = 0; i < population; ++i) pool[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(population - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace parapde
