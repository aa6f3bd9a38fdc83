#pragma once

// Deterministic randomness. Every sentence gets its own engine derived from
// (seed, sentence index) through a splitmix64 finalizer, so results do not
// depend on processing order or thread count. std::mt19937_64 has a
// standard-specified sequence; the distributions are hand-rolled because the
// std::*_distribution algorithms are implementation-defined and would break
// byte-for-byte reproducibility across toolchains.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

namespace textnoise {

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) ^ (0x9E3779B97F4A7C15ull * (index + 1)));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform in [0, 1) with 53 significant bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform() < p;
  }

  // Uniform in [0, n). Multiply-shift; the bias is O(n / 2^64).
  std::size_t below(std::size_t n) {
    if (n == 0) throw std::logic_error("Rng::below: empty range");
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(engine_()) * static_cast<unsigned __int128>(n);
    return static_cast<std::size_t>(wide >> 64);
  }

  // Standard normal via Box-Muller (single value per pair of uniforms; no
  // cached state, so the draw sequence is a pure function of the engine).
  double normal01() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal01(); }

  // Index into `weights` proportionally to the (non-negative) weights.
  std::size_t categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::logic_error("Rng::categorical: no mass");
    double u = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return i;
    }
    return weights.size() - 1;
  }

 private:
  std::mt19937_64 engine_;
};

// Sample a key from a probability map (iteration order of std::map keeps this
// deterministic). Total mass may be any positive value.
template <typename K>
const K& sample_key(const std::map<K, double>& dist, Rng& rng) {
  double total = 0.0;
  for (const auto& [k, w] : dist) total += w;
  if (!(total > 0.0)) throw std::logic_error("sample_key: no mass");
  double u = rng.uniform() * total;
  for (const auto& [k, w] : dist) {
    u -= w;
    if (u < 0.0) return k;
  }
  return dist.rbegin()->first;
}

}  // namespace textnoise
