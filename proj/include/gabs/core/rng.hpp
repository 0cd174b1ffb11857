#ifndef GABS_CORE_RNG_HPP
#define GABS_CORE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <span>

namespace gabs {

// splitmix64 step; also used as the mixing function for hash keys.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return mix64(seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

template <typename T>
std::uint64_t hash_span(std::uint64_t seed, std::span<const T> values) {
  std::uint64_t h = seed;
  for (const T& v : values) h = hash_combine(h, static_cast<std::uint64_t>(v));
  return hash_combine(h, values.size());
}

// Deterministic counter-based generator. The standard distributions are not
// bit-reproducible across library implementations, so uniforms and normals
// are derived from the raw stream directly.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace gabs

#endif  // GABS_CORE_RNG_HPP
