#pragma once

#include <cstdint>
#include <random>

#include "count.hpp"

namespace motifcc {

/// Seedable, splittable pseudorandom stream. A stream is identified by
/// (seed, stream id); split() derives an independent child stream.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream), engine_(mix(seed, stream)) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  Rng split(std::uint64_t child) const { return Rng(mix(seed_, stream_), child); }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Lemire's multiply-shift with rejection: platform independent.
    u128 m = static_cast<u128>(engine_()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = -bound % bound;
      while (low < threshold) {
        m = static_cast<u128>(engine_()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform count in [0, bound) for any supported count width.
  template <CountType C>
  C below_count(const C& bound) {
    const unsigned nbytes = count_traits<C>::byte_length(bound);
    if (nbytes <= 8) {
      return C(below(static_cast<std::uint64_t>(bound)));
    }
    // Rejection sampling on the smallest power of two above bound.
    unsigned bits = 0;
    for (C t = bound - 1; !count_traits<C>::is_zero(t); t >>= 1) ++bits;
    for (;;) {
      C v = 0;
      unsigned filled = 0;
      while (filled < bits) {
        v <<= 64;
        v |= C(engine_());
        filled += 64;
      }
      v >>= (filled - bits);
      if (v < bound) return v;
    }
  }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    return splitmix(splitmix(seed) ^ splitmix(stream + 0x632be59bd9b4e019ULL));
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace motifcc
