#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace centerout {

// Deterministic RNG wrapper. All variate transforms are implemented by hand
// on top of mt19937_64 so that streams do not depend on the standard
// library's unspecified distribution algorithms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // uniform integer in [lo, hi] by rejection-free modulo with 64-bit slack
  std::uint64_t uniform_index(std::uint64_t n) {
    // n is tiny compared to 2^64; modulo bias is negligible but we reject
    // the top sliver anyway to keep the draw exact.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // standard normal, Box-Muller with caching
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // uniform direction on the unit sphere in R^d
  std::vector<double> unit_vector(int d) {
    std::vector<double> v(d);
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (int k = 0; k < d; ++k) {
        v[k] = normal();
        n2 += v[k] * v[k];
      }
    } while (n2 == 0.0);
    const double inv = 1.0 / std::sqrt(n2);
    for (int k = 0; k < d; ++k) v[k] *= inv;
    return v;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Named-stream seed derivation: every module draws from its own stream of
// the master seed so adding a consumer never shifts another one.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream);

}  // namespace centerout
