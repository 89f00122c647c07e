#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace laq {

// Deterministic random helpers. std::uniform_*_distribution is
// implementation-defined, so generated datasets would not be reproducible
// across standard libraries; these draw directly from the engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Unbiased integer in [0, n). Rejection sampling on the top range.
  std::uint64_t bounded(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  std::int64_t range(std::int64_t lo, std::int64_t hi_exclusive) {
    return lo + static_cast<std::int64_t>(bounded(static_cast<std::uint64_t>(hi_exclusive - lo)));
  }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double range_real(double lo, double hi) { return lo + unit() * (hi - lo); }

 private:
  std::mt19937_64 engine_;
};

// FNV-1a, used both to derive per-table sub-seeds and for result checksums.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  return seed ^ fnv1a(tag);
}

}  // namespace laq
