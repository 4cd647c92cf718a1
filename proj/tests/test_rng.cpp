#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "dlroc/rng.hpp"

using namespace dlroc;

namespace {

// Independent transcription of the documented stream.
struct RefStream {
  std::uint64_t state;
  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64); }
};

}  // namespace

TEST_CASE("stream matches published SplitMix64 outputs") {
  CounterRng zero(0);
  CHECK(zero.next_u64() == 0xE220A8397B1DCDAFULL);
  CounterRng r(1234567);
  CHECK(r.next_u64() == 6457827717110365317ULL);
  CHECK(r.next_u64() == 3203168211198807973ULL);
  CHECK(r.next_u64() == 9817491932198370423ULL);
  CHECK(r.counter() == 3);
}

TEST_CASE("stream matches the reference transcription") {
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xFFFFFFFFFFFFFFFFULL}) {
    CounterRng a(seed);
    RefStream b{seed};
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next());
  }
}

TEST_CASE("derived draws") {
  CounterRng a(7);
  RefStream b{7};
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u == static_cast<double>(b.next() >> 11) / 9007199254740992.0);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (std::uint64_t n : {1ULL, 2ULL, 3ULL, 10ULL, 1000003ULL}) {
    for (int i = 0; i < 200; ++i) {
      const std::uint64_t v = a.below(n);
      CHECK(v == b.below(n));
      CHECK(v < n);
    }
  }
  CounterRng g(3);
  RefStream h{3};
  for (int i = 0; i < 200; ++i) {
    const double u1 = static_cast<double>(h.next() >> 11) / 9007199254740992.0;
    const double u2 = static_cast<double>(h.next() >> 11) / 9007199254740992.0;
    const double want = std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    CHECK(g.normal() == doctest::Approx(want).epsilon(1e-15));
  }
}

TEST_CASE("normal draws have unit variance") {
  CounterRng g(99);
  const int n = 200000;
  double s = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = g.normal();
    s += v;
    ss += v * v;
  }
  const double mean = s / n;
  CHECK(std::abs(mean) < 5.0 / std::sqrt(n));
  CHECK(std::abs(ss / n - mean * mean - 1.0) < 0.02);
}

TEST_CASE("derive_seed separates coordinates") {
  CHECK(derive_seed(5, {1, 2}) == derive_seed(5, {1, 2}));
  CHECK(derive_seed(5, {1, 2}) != derive_seed(5, {2, 1}));
  CHECK(derive_seed(5, {1}) != derive_seed(6, {1}));
  CHECK(derive_seed(5, {0}) != derive_seed(5, {}));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 100; ++i)
    for (std::uint64_t j = 0; j < 100; ++j) seen.insert(derive_seed(1, {i, j}));
  CHECK(seen.size() == 10000);
}

TEST_CASE("sample_without_replacement matches a reference Fisher-Yates") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 1 + seed * 7 % 40;
    const std::size_t k = seed % (n + 1);
    CounterRng rng(seed);
    const auto got = sample_without_replacement(n, k, rng);

    RefStream ref{seed};
    std::vector<std::size_t> slots(n);
    std::iota(slots.begin(), slots.end(), 0);
    for (std::size_t i = 0; i < k; ++i) std::swap(slots[i], slots[i + ref.below(n - i)]);
    slots.resize(k);
    CHECK(got == slots);
    CHECK(std::set<std::size_t>(got.begin(), got.end()).size() == k);
  }
}
