#pragma once

#include <cmath>
#include <cstdint>

namespace htsentinel {

// Splittable counter-based pseudorandom generator.
//
// A stream is identified by (seed, s1, s2) and emits the 64-bit sequence
//
//   out_i = mix64(key + (i + 1) * GAMMA),        i = 0, 1, 2, ...
//   key   = mix64(mix64(mix64(seed + GAMMA) ^ s1) ^ s2)
//
// with GAMMA = 0x9E3779B97F4A7C15 and mix64 the SplitMix64 finalizer
//
//   z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9;
//   z ^= z >> 27;  z *= 0x94D049BB133111EB;
//   z ^= z >> 31;
//
// Every draw is a pure function of (seed, s1, s2, i), so substreams can be
// evaluated in any order or concurrently and still reproduce identical
// output bit for bit. Consumers derive one stream per unit of work, e.g.
// calibration uses (seed, cell_index, replicate_index).
//
// Derived variates:
//   uniform01()     top 53 bits:  (out >> 11) * 2^-53            in [0, 1)
//   uniform01inc()  ((out >> 11) + 1) * 2^-53                    in (0, 1]
//   normal()        Box-Muller pair; the spare value is cached
//   below(n)        multiply-shift range reduction (out * n) >> 64
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t s1 = 0, std::uint64_t s2 = 0)
      : key_(mix64(mix64(mix64(seed + kGamma) ^ s1) ^ s2)) {}

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGamma); }

  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform01inc() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01inc();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace htsentinel
