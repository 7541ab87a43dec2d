#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace qtune {

// SplitMix64 finalizer. Used for seed derivation and for the value-noise
// lattice of synthetic surfaces, so its output is part of the file contract.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Maps 64 random bits onto [0, 1) using the top 53 bits.
constexpr double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Independent random streams carved out of one run seed.
enum class Stream : std::uint64_t {
  kAgent = 0,
  kPolicy = 1,
  kSurface = 2,
  kNetwork = 3,
};

// derive_seed(seed, s) = splitmix64(seed + 0x9E3779B97F4A7C15 * (s + 1))
constexpr std::uint64_t derive_seed(std::uint64_t run_seed, Stream stream) {
  return splitmix64(run_seed +
                    0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(stream) + 1));
}

// Deterministic generator. The engine is std::mt19937_64 (fully specified by
// the standard); the distributions below are hand-written because the
// standard library distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() { return unit_interval(engine_()); }

  // Uniform integer in [0, n) by rejection sampling. n must be > 0.
  std::size_t uniform_index(std::size_t n) {
    const std::uint64_t range = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % range);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qtune
