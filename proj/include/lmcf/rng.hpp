#pragma once

#include <cstdint>
#include <vector>

namespace lmcf {

/// PCG32 (pcg_setseq_64_xsh_rr_32, M.E. O'Neill, pcg-random.org).
///
/// This is the repo's one source of randomness. Fold splits and landmark
/// draws must be reproducible bit-for-bit across implementations and
/// languages, so the generator is pinned to the published reference
/// recipe rather than std::mt19937:
///
///   state' = state * 6364136223846793005 + inc
///   out    = rotr32(uint32(((state >> 18) ^ state) >> 27), state >> 59)
///
/// seeded as state=0, inc=(stream<<1)|1, step, state+=seed, step.
/// The stream selector is fixed to kStream below.
class Pcg32 {
 public:
  static constexpr std::uint64_t kStream = 0xda3e39cb94b95bdbULL;

  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = kStream) {
    state_ = 0u;
    inc_ = (stream << 1u) | 1u;
    next();
    state_ += seed;
    next();
  }

  std::uint32_t next() {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    const auto xorshifted =
        static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  /// Uniform draw in [0, bound) by rejection (the reference
  /// pcg32_boundedrand_r recipe). bound must be nonzero.
  std::uint32_t bounded(std::uint32_t bound) {
    const std::uint32_t threshold = (0u - bound) % bound;
    for (;;) {
      const std::uint32_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  /// 64-bit variant of the same rejection recipe; the word is built
  /// high-half-first from two next() calls. Used for weighted draws
  /// whose totals may not fit 32 bits.
  std::uint64_t bounded64(std::uint64_t bound) {
    const std::uint64_t threshold = (0u - bound) % bound;
    for (;;) {
      const std::uint64_t hi = next();
      const std::uint64_t r = (hi << 32) | next();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t state_;
  std::uint64_t inc_;
};

/// Fisher-Yates, descending index, swap target drawn with bounded().
template <typename T>
void shuffle(std::vector<T>& v, Pcg32& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng.bounded(static_cast<std::uint32_t>(i));
    std::swap(v[i - 1], v[j]);
  }
}

/// One splitmix64 step; used to derive per-fold sub-seeds from one
/// experiment seed without correlating the streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace lmcf
