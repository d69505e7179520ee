#pragma once

#include <cstdint>
#include <string>

namespace hgl {

// splitmix64; used to derive independent streams from (seed, key) pairs.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Small deterministic generator. The standard distributions are
// implementation-defined, so all draws go through the explicit mappings
// below; identical seeds give identical streams on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64(seed)) {}

  Rng(std::uint64_t seed, std::uint64_t stream)
      : state_(splitmix64(seed ^ splitmix64(stream))) {}

  Rng(std::uint64_t seed, const std::string& stream)
      : Rng(seed, fnv1a64(stream)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  // uniform in [0,1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // uniform integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) {
    return n ? next_u64() % n : 0;
  }

  bool bernoulli(double p) { return next_double() < p; }

 private:
  std::uint64_t state_;
};

}  // namespace hgl
