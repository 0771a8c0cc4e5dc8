#pragma once

#include <cstdint>
#include <limits>

namespace qtps {

/// Counter-based random stream.
///
/// Every draw is a pure function of (key, counter), so a stream can be
/// copied, replayed, or split into statistically independent children
/// without sharing mutable state. Children are addressed by an index, which
/// makes concurrent work reproducible regardless of scheduling.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform double in [0, 1).
  double uniform() noexcept;
  /// Uniform double in (0, 1).
  double uniform_open() noexcept;
  /// Standard normal variate (Box-Muller, cached second value).
  double normal() noexcept;
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Independent child stream. Does not advance this stream.
  [[nodiscard]] RandomStream split(std::uint64_t index) const noexcept;

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

 private:
  RandomStream(std::uint64_t key, std::uint64_t counter, bool) noexcept
      : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace qtps
