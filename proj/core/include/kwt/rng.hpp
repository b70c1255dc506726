#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace kwt {

// Deterministic, platform-independent randomness.
//
// Every stochastic choice in the toolkit (demo sampling, mock correctness
// draws) derives from a fixed two-stage construction so that seeded runs are
// reproducible across processes, platforms, and reimplementations:
//
//   1. Key derivation: FNV-1a 64-bit over the sequence
//        seed (8 little-endian bytes), then for each key part a 0x1F
//        separator byte followed by the part's bytes (strings as-is,
//        integers as 8 little-endian bytes).
//   2. Stream: SplitMix64 seeded with that key. next_u64 advances the state
//        by 0x9E3779B97F4A7C15 and applies the standard finalizer.
//
//   next_double() = (next_u64() >> 11) * 2^-53, uniform in [0, 1).
//   next_below(n) = next_u64() % n.
//
// Platform default RNG engines are deliberately not used anywhere.

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 14695981039346656037ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

class RngKey {
 public:
  explicit RngKey(std::uint64_t seed) : h_(14695981039346656037ULL) {
    absorb_u64(seed);
  }

  RngKey& part(std::string_view s) {
    absorb_separator();
    h_ = fnv1a64(s, h_);
    return *this;
  }
  RngKey& part(std::uint64_t v) {
    absorb_separator();
    absorb_u64(v);
    return *this;
  }

  std::uint64_t value() const { return h_; }

 private:
  void absorb_separator() {
    h_ ^= 0x1F;
    h_ *= 1099511628211ULL;
  }
  void absorb_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= static_cast<unsigned char>(v >> (8 * i));
      h_ *= 1099511628211ULL;
    }
  }

  std::uint64_t h_;
};

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  explicit SplitMix64(const RngKey& key) : state_(key.value()) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n). Modulo bias is below 2^-50 for any n this toolkit uses.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

// Stable short hex tag used by the mock model's distractor strings.
inline std::string short_hex_tag(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(8, '0');
  for (int i = 7; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

}  // namespace kwt
