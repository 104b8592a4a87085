#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace riskann {

/// splitmix64 step; used to expand a 64-bit seed into generator state.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Deterministic xoshiro256** generator seeded through splitmix64.
///
/// Every derived draw (uniform reals, bounded integers, normals) is defined
/// here rather than through <random> distributions, whose output is
/// implementation-defined. Identical seeds give identical streams on every
/// platform with IEEE-754 doubles.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() noexcept;

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) noexcept;

  /// Unbiased integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Standard normal via the Marsaglia polar method.
  double normal() noexcept;

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace riskann
