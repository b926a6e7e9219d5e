#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>

namespace tacmod {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stateless counter-based generator: the n-th draw of stream `s` under seed
/// `k` is splitmix64(splitmix64(k ^ (s * phi)) + n). Any draw can be computed
/// independently, so noise fields are reproducible regardless of evaluation order.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(splitmix64(seed ^ (stream * 0x9e3779b97f4a7c15ULL))) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept { return splitmix64(key_ + counter); }

  /// Uniform in (0, 1] with 53 random bits.
  double uniform(std::uint64_t counter) const noexcept {
    return (static_cast<double>(bits(counter) >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on draws 2n and 2n+1.
  double normal(std::uint64_t counter) const noexcept {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Both Box-Muller outputs of draws 2n and 2n+1; `first` equals normal(n).
  struct NormalPair {
    double first;
    double second;
  };

  NormalPair normal_pair(std::uint64_t counter) const noexcept {
    const double r = std::sqrt(-2.0 * std::log(uniform(2 * counter)));
    const double theta = 2.0 * std::numbers::pi * uniform(2 * counter + 1);
    return {r * std::cos(theta), r * std::sin(theta)};
  }

 private:
  std::uint64_t key_;
};

/// Sequential wrapper over CounterRng for shuffles, initialisation, sampling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept : base_(seed, stream) {}

  std::uint64_t next_u64() noexcept { return base_.bits(counter_++); }
  double uniform() noexcept { return base_.uniform(counter_++); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * (uniform() - 0x1.0p-53); }
  double normal() noexcept { return base_.normal(counter_++); }

  /// Uniform integer in [0, n) by rejection, n > 0.
  std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  CounterRng base_;
  std::uint64_t counter_ = 0;
};

}  // namespace tacmod
