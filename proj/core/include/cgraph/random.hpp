#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "cgraph/text.hpp"

namespace cgraph {

/// splitmix64 stream. Unlike the <random> distributions its output is
/// identical on every standard library, which keeps seeded runs byte-stable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    // mix64 applies the increment itself.
    const auto current = state_;
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(current);
  }

  double uniform() { return unit_interval(next()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::size_t below(std::size_t n) {
    // Values below threshold would bias x % bound.
    const std::uint64_t bound = n;
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
      const auto x = next();
      if (x >= threshold) return static_cast<std::size_t>(x % bound);
    }
  }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace cgraph
