#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace msgeo {

// Seeded RNG with hand-rolled transforms. std::mt19937_64 is pinned by the
// standard, but the std distributions are not, so we derive uniforms and
// gaussians ourselves to keep streams reproducible bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed * 0x9e3779b97f4a7c15ull + 0xda3e39cb94b95bdbull) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1)
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  // uniform index in [0, n), n >= 1
  std::size_t index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  double gaussian() {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::mt19937_64 eng_;
};

// Mixes a base seed with a stream id (cube id, restart index, ...) so that
// parallel per-item jobs draw independent, order-free streams.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base ^ (stream + 0x9e3779b97f4a7c15ull + (base << 6) + (base >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace msgeo
