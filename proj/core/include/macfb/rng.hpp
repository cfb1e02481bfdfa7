#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace macfb {

/// splitmix64 step; used to derive independent stream seeds from (seed, index)
/// so that parallel block decomposition never changes the sampled values.
inline uint64_t mix_seed(uint64_t seed, uint64_t index) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Deterministic RNG. mt19937_64 output is pinned by the standard, and the
/// samplers below avoid std::distributions (whose streams are
/// implementation-defined), so results are reproducible across platforms.
class Rng {
public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double next_unit() { return (gen_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  int next_below(int n) {
    // Rejection-free modulo is biased; n here is tiny (alphabets, messages),
    // use 53-bit uniform scaling which is exact enough and deterministic.
    int v = static_cast<int>(next_unit() * n);
    return v >= n ? n - 1 : v;
  }

  /// Sample index from a pmf by CDF inversion; assumes sum(p) == 1.
  int next_from(const std::vector<double>& p) {
    double u = next_unit();
    double acc = 0.0;
    for (size_t i = 0; i + 1 < p.size(); ++i) {
      acc += p[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(p.size()) - 1;
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace macfb
