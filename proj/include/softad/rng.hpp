#pragma once

#include <cstdint>
#include <cstddef>
#include <span>
#include <utility>

namespace softad {

/// Deterministic random stream: xoshiro256** seeded through splitmix64.
///
/// The integer stream is bit-identical on every platform. Uniform doubles use
/// the top 53 bits of each draw. Gaussian draws use the Marsaglia polar
/// method, which only needs sqrt and log.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);

  /// Standard normal.
  double normal();

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Independent stream derived from the construction seed and a stream id.
  /// Does not depend on how far this stream has been advanced.
  Rng substream(std::uint64_t stream_id) const;

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace softad
