#pragma once

#include "otfs/types.hpp"

#include <cstdint>
#include <random>

namespace otfs {

/// Seedable random source. Every stochastic operation takes one explicitly.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Independent stream for trial `index` of a run seeded with `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x6f746673u};
    Rng r(0);
    r.eng_.seed(seq);
    return r;
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  double normal() { return normal_(eng_); }

  /// Circularly-symmetric complex Gaussian with E|z|^2 = var.
  cplx cnormal(double var) {
    const double s = std::sqrt(var / 2.0);
    const double re = normal_(eng_);
    const double im = normal_(eng_);
    return {s * re, s * im};
  }

  std::mt19937_64& engine() noexcept { return eng_; }

private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace otfs
