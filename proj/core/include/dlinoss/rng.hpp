#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dlinoss {

// Deterministic RNG: mt19937_64 core with hand-rolled double conversions so
// results do not depend on the standard library's distribution internals.
// Streams are split with SplitMix64 so per-index forks are order-independent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix(seed)), lineage_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; one spare value cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform index in [0, n), rejection sampled so the draw is exact.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  // Independent stream derived from this RNG's seed and a stream id; forks
  // with distinct ids are order-independent.
  Rng fork(std::uint64_t stream) const {
    return Rng(splitmix(lineage_ ^ (0x9e3779b97f4a7c15ULL * (stream + 1))));
  }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  std::uint64_t lineage_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dlinoss
