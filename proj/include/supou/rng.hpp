#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "supou/errors.hpp"

namespace supou {

// splitmix64 step; used to expand seeds into generator state and to derive
// independent per-stream seeds from (master seed, stream index).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256++ with the distribution samplers implemented in-repo (Box-Muller
// normals, inversion exponentials, Marsaglia-Tsang gammas) so that a seed
// reproduces the same stream bit-for-bit on any platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t st = seed;
    for (auto& w : s_) w = splitmix64(st);
  }

  // Independent substream for (master seed, stream index); used to decouple
  // replications and to keep event draws separate from return draws.
  static Rng stream(std::uint64_t master_seed, std::uint64_t stream_index) {
    std::uint64_t a = master_seed;
    std::uint64_t b = stream_index ^ 0xd1b54a32d192ed03ULL;
    std::uint64_t st = splitmix64(a) ^ (splitmix64(b) + 0x9e3779b97f4a7c15ULL);
    Rng r(0);
    for (auto& w : r.s_) w = splitmix64(st);
    r.have_spare_ = false;
    return r;
  }

  std::uint64_t next() {
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

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1); midpoint-shifted lattice avoids exact 0 and 1.
  double uniform_pos() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double th = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
  }

  double exponential(double mean) {
    require(mean > 0.0, errc::contract, "exponential mean must be positive");
    return -mean * std::log(uniform_pos());
  }

  // Marsaglia-Tsang squeeze for shape >= 1, with the power-of-uniform boost
  // for shape < 1.
  double gamma(double shape, double scale) {
    require(shape > 0.0 && scale > 0.0, errc::contract, "gamma shape and scale must be positive");
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0;
      double v = 0.0;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4] = {};
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace supou
