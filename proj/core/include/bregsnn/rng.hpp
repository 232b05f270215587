#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "bregsnn/errors.hpp"
#include "bregsnn/tensor.hpp"

namespace bregsnn {

// xoshiro256++ (Blackman & Vigna), state seeded via splitmix64.
// Fixed algorithm so streams are identical across platforms for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // [0, 1) with 53 bits of precision
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    if (!(lo < hi)) throw ShapeError("uniform: lo must be < hi");
    return lo + (hi - lo) * next_double();
  }

  // Box-Muller; one fresh pair of uniforms per sample.
  double normal(double sigma = 1.0) {
    if (!(sigma > 0.0)) throw ShapeError("normal: sigma must be > 0");
    double u1 = next_double();
    while (u1 == 0.0) u1 = next_double();
    const double u2 = next_double();
    return sigma * std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Knuth multiplication method; adequate for the small rates used here.
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    double p = 1.0;
    std::uint64_t k = 0;
    do {
      ++k;
      p *= next_double();
    } while (p > limit);
    return k - 1;
  }

  // index in [0, n)
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(next_double() * static_cast<double>(n));
  }

  Tensor rand_uniform(const std::vector<std::size_t>& shape, double lo,
                      double hi) {
    if (!(lo < hi)) throw ShapeError("rand_uniform: lo must be < hi");
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i)
      t[i] = lo + (hi - lo) * next_double();
    return t;
  }

  Tensor rand_normal(const std::vector<std::size_t>& shape, double sigma) {
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = normal(sigma);
    return t;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::array<std::uint64_t, 4> s_{};
};

// Fisher-Yates shuffle of an index vector, deterministic given rng state.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng.index(i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace bregsnn
