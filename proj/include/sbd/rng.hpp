#pragma once

#include <cstdint>
#include <string_view>

namespace sbd {

// splitmix64: tiny deterministic generator, identical output on every
// platform (std::uniform_int_distribution is not portable across stdlibs).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, n), unbiased enough for test-data purposes
  std::uint64_t next_below(std::uint64_t n) { return n ? next() % n : 0; }

  // uniform in [0, 1)
  double next_unit() { return double(next() >> 11) * (1.0 / 9007199254740992.0); }

  int next_int(int lo, int hi) {  // inclusive range
    return lo + int(next_below(std::uint64_t(hi - lo + 1)));
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  SplitMix64 rng(a ^ (b * 0x9e3779b97f4a7c15ULL));
  return rng.next();
}

}  // namespace sbd
