#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace dlroc {

/// Counter-based 64-bit generator. Draw i (1-based) of a stream with seed s is
/// splitmix64_finalize(s + i * 0x9E3779B97F4A7C15), i.e. the SplitMix64
/// sequence. All derived quantities below are defined in terms of next_u64()
/// so the streams can be reproduced in any language:
///
///   uniform()     = (next_u64() >> 11) * 2^-53                 in [0, 1)
///   below(n)      = high 64 bits of next_u64() * n             in [0, n)
///   normal()      = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)          Box-Muller, one
///                   output per pair of uniforms, nothing cached
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64();
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t below(std::uint64_t n);
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_finalize(std::uint64_t z);

/// Sub-seed for a tuple of coordinates, folded left with
/// h <- splitmix64_finalize(h ^ (c + 0x9E3779B97F4A7C15 + (h << 6) + (h >> 2))).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords);

/// Partial Fisher-Yates: start from 0..n-1, for i in [0, k) swap slot i with
/// slot i + below(n - i). Returns the first k slots.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, CounterRng& rng);

}  // namespace dlroc
