#pragma once

#include <cstdint>
#include <random>

namespace voterperc {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed of replicate `index` under `master`. Streams depend only on the pair,
// never on scheduling, so parallel and serial runs draw identical numbers.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_stream(std::uint64_t master, std::uint64_t index) {
  return Rng(derive_seed(master, index));
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by Lemire's multiply-shift with rejection.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  std::uint64_t x = rng();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = rng();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

inline double exponential(Rng& rng, double rate) {
  return std::exponential_distribution<double>(rate)(rng);
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace voterperc
