#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>

namespace mcsum {

// SplitMix64 (Steele, Lea, Flood). Portable and bit-reproducible everywhere.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1].
  double uniform_open_zero() noexcept {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // Unit-rate exponential variate.
  double exponential() noexcept { return -std::log(uniform_open_zero()); }

 private:
  std::uint64_t state_;
};

// Derives an independent stream seed from a master seed and a path of indices.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = master;
  for (std::uint64_t k : path) {
    SplitMix64 g(s ^ (k * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
    s = g.next();
  }
  return s;
}

// FNV-1a over raw bytes.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < len; ++k) {
    h ^= p[k];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace mcsum
