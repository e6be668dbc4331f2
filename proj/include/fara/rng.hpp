#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace fara {

/// Seeded random stream with portable draws.
///
/// std::mt19937_64 is fully specified by the standard, but the standard
/// distributions are not, so every draw here is derived from raw engine
/// output. split() derives an independent child stream from the root seed.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : root_(mix(seed, stream_id)), engine_(root_) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Unbiased integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t draw = next();
    while (draw >= limit) draw = next();
    return static_cast<std::size_t>(draw % bound);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[uniform_index(i)]);
    }
  }

  RandomStream split(std::uint64_t stream_id) const { return RandomStream(root_, stream_id + 1); }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream_id) {
    return splitmix(splitmix(seed) ^ splitmix(stream_id + 0x632be59bd9b4e019ULL));
  }

  std::uint64_t root_;
  std::mt19937_64 engine_;
};

}  // namespace fara
