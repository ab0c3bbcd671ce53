#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace citegcn {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// mt19937_64 engine (sequence fixed by the standard) with hand-rolled
// distribution helpers, so draws are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, bound) via 128-bit multiply-shift; the bias for
  // bound << 2^64 is negligible for sampling purposes.
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Knuth multiplication method; fine for the small means used here.
  std::uint64_t poisson(double mean) {
    const double limit = std::exp(-mean);
    double prod = 1.0;
    std::uint64_t k = 0;
    do {
      prod *= next_double();
      ++k;
    } while (prod > limit);
    return k - 1;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // Index drawn proportionally to non-negative weights; total must be > 0.
  std::size_t weighted_pick(const std::vector<double>& weights, double total) {
    double r = next_double() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      r -= weights[i];
      if (r < 0.0) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

  std::size_t weighted_pick(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    return weighted_pick(weights, total);
  }

  // Independent deterministic substream k of this generator's seed.
  Rng fork(std::uint64_t stream) const {
    return Rng(splitmix64(seed_ ^ (0xa0761d6478bd642fULL + stream)));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace citegcn
