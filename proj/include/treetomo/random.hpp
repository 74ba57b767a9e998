#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace treetomo {

/// SplitMix64. Satisfies UniformRandomBitGenerator. Streams are addressed by
/// (seed, stream index), so walk i of a batch always sees the same numbers no
/// matter which worker thread runs it.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  SplitMix64(std::uint64_t seed, std::uint64_t stream)
      : state_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

// Uniform on [0, 1) with 53 random bits; identical on every platform, unlike
// std::uniform_real_distribution.
template <class Urbg>
double uniform01(Urbg& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n).
template <class Urbg>
std::uint64_t uniform_index(Urbg& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

template <class Urbg>
double standard_exponential(Urbg& rng) {
  return -std::log1p(-uniform01(rng));
}

}  // namespace treetomo
