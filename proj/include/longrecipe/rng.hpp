#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace longrecipe {

// splitmix64 finalizer; used to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a, 64 bit. Stable across platforms, so it can key seeds by doc id.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Per-sample seed. Depends only on its arguments, never on processing order
// or worker count.
constexpr std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view doc_id,
                                    std::uint64_t epoch = 0) {
  return mix64(mix64(run_seed) ^ mix64(fnv1a64(doc_id) + 0x632be59bd9b4e019ULL) ^
               mix64(epoch * 0x8cb92ba72f3d8dd7ULL + 1));
}

// mt19937_64 engine with bounded draws implemented here rather than through
// std::uniform_int_distribution, whose output is library-specific. Outputs
// are bit-identical on every conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [lo, hi], inclusive.
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo;
    if (span == ~std::uint64_t{0}) return next();
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % range);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return lo + x % range;
  }

  // Uniform double in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

// Sorted uniform k-subset of {0, ..., n-1} by selection sampling
// (Knuth, Algorithm S). O(n) time, output already ordered.
std::vector<std::uint64_t> sample_sorted_subset(std::uint64_t n, std::uint64_t k, Rng& rng);

}  // namespace longrecipe
