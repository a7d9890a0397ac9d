#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace fedcvr {

/// Counter-based generator: the i-th output is a pure function of
/// (key, i), so streams can be split by label or index without any
/// shared state. The mixing function is the SplitMix64 finalizer.
///
/// Satisfies UniformRandomBitGenerator, but the library never hands it
/// to <random> distributions: their algorithms differ between standard
/// libraries and would break byte-level reproducibility.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key = 0, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Independent child stream identified by a label ("data", "policy", ...).
  CounterRng split(std::string_view label) const;
  /// Independent child stream identified by an index (round, client, ...).
  CounterRng split(std::uint64_t index) const;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Standard normal draw (Box-Muller, no cached second variate).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

/// FNV-1a hash of a label, used to derive named streams.
std::uint64_t hash_label(std::string_view label);

/// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(std::span<T> items, CounterRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(items[i - 1], items[j]);
  }
}

/// Uniformly random size-m subset of {0..n-1}, returned in ascending order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m, CounterRng& rng);

/// Sequential weighted sampling without replacement: each draw picks an
/// index with probability proportional to its weight among those left.
/// Returned in draw order. Zero-weight entries are drawn only once every
/// positive-weight entry is exhausted (then uniformly).
std::vector<std::size_t> weighted_sample_without_replacement(std::span<const double> weights,
                                                             std::size_t m, CounterRng& rng);

/// Index drawn with probability proportional to weights (non-negative, positive sum).
std::size_t sample_categorical(std::span<const double> weights, CounterRng& rng);

}  // namespace fedcvr
