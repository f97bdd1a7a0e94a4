#pragma once

#include <cstdint>

namespace distsynth {

namespace detail {

// Finalizer from splitmix64; bijective on 64-bit words.
inline constexpr uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

inline constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
inline constexpr uint64_t kStreamSalt = 0x5851f42d4c957f2dULL;

}  // namespace detail

// Counter-based pseudorandom stream. Output j is a fixed mix of (key, j), so
// a (seed, stream_id) pair fully determines the sequence, and substreams are
// statistically independent of the parent and of each other.
class Stream {
 public:
  explicit Stream(uint64_t seed, uint64_t stream_id = 0)
      : key_(detail::mix64(detail::mix64(seed + detail::kGamma) ^
                           detail::mix64(stream_id + detail::kStreamSalt))) {}

  uint64_t next_u64() { return detail::mix64(key_ + detail::kGamma * ++counter_); }

  // Uniform on [0,1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1p-53; }

  // Uniform on (0,1); safe as a log or quantile argument.
  double next_unit_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  // Uniform on {0, ..., bound-1} without modulo bias (Lemire's method).
  uint64_t next_below(uint64_t bound) {
    while (true) {
      const uint64_t x = next_u64();
      const unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
      const uint64_t lo = static_cast<uint64_t>(m);
      if (lo >= bound || lo >= (-bound) % bound) return static_cast<uint64_t>(m >> 64);
    }
  }

  // Independent child stream; does not advance or perturb this stream.
  Stream substream(uint64_t child) const {
    Stream s(0);
    s.key_ = detail::mix64(key_ ^ detail::mix64(child + detail::kGamma));
    return s;
  }

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace distsynth
