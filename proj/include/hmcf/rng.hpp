#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hmcf {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for the k-th member of an ensemble. Depends only on (seed, k), so
// ensembles are identical no matter how paths are distributed over workers,
// and two runs with the same seed consume identical increments (common
// random numbers across policies and dt refinements).
inline std::uint64_t path_seed(std::uint64_t seed, std::uint64_t k) {
  return splitmix64(splitmix64(seed) ^ splitmix64(k + 0x51ed2701ULL));
}

// Standard normal stream: mt19937_64 (bit-exact per the C++ standard) plus
// our own uint64 -> double mapping and Box-Muller transform, so the draw
// sequence does not depend on the standard library's distribution internals.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : gen_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = to_unit(gen_());
    } while (u1 <= 0.0);
    const double u2 = to_unit(gen_());
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace hmcf
