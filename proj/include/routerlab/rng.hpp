#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace routerlab {

// Deterministic stream derivation. Every stochastic unit of work (a task draw,
// a profiling trial, a training iteration, an eval episode) gets its own
// stream seed derived from (master seed, domain string, indices). Streams are
// independent of execution order, which is what makes runs reproducible and
// resume-equivalent.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view domain,
                                 std::uint64_t a = 0, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(master ^ fnv1a64(domain));
  h = splitmix64(h ^ (a + 0x9E3779B97F4A7C15ULL));
  h = splitmix64(h ^ (b + 0xC2B2AE3D27D4EB4FULL));
  h = splitmix64(h ^ (c + 0x165667B19E3779F9ULL));
  return h;
}

// mt19937_64 engine output is bit-exact across platforms; we avoid
// std::*_distribution (implementation defined) and convert draws ourselves.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1) with 53-bit resolution
  double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return u01() < p; }

  // uniform integer in [lo, hi] inclusive (Lemire's method, no modulo bias)
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    std::uint64_t n = hi - lo + 1;
    if (n == 0) return eng_();  // full range
    unsigned __int128 m = static_cast<unsigned __int128>(eng_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      std::uint64_t t = (0 - n) % n;
      while (low < t) {
        m = static_cast<unsigned __int128>(eng_()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return lo + static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace routerlab
