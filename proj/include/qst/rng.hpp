#pragma once

// Seedable, splittable random streams.
//
// The generator family is splitmix64: a counter-based 64-bit mixer with
// cheap constant-time stream derivation. Every Monte Carlo shot can own a
// stream derived from (master seed, shot index), so results do not depend
// on how a shot loop is partitioned, and identical (config, seed) pairs
// reproduce identical outputs byte for byte.

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>

namespace qst {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  // Stream `index` of the family rooted at `master`. Mixing the index
  // through the output function decorrelates neighbouring streams.
  static RngStream derive(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master;
    const std::uint64_t a = splitmix64_next(s);
    s = index ^ 0xD1B54A32D192ED03ULL;
    const std::uint64_t b = splitmix64_next(s);
    return RngStream(a ^ (b + 0x2545F4914F6CDD1DULL));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return splitmix64_next(state_); }

  // Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Index sampled proportionally to `weights` (need not be normalized).
  std::size_t sample_discrete(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw std::invalid_argument("sample_discrete: negative weight");
      total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("sample_discrete: zero total weight");
    const double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.size() - 1;
  }

  bool bernoulli(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("bernoulli: p outside [0,1]");
    return uniform() < p;
  }

  long long poisson(double mean) {
    if (mean < 0.0) throw std::invalid_argument("poisson: negative mean");
    if (mean == 0.0) return 0;
    std::poisson_distribution<long long> dist(mean);
    return dist(*this);
  }

  long long binomial(long long n, double p) {
    if (n < 0) throw std::invalid_argument("binomial: negative n");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("binomial: p outside [0,1]");
    std::binomial_distribution<long long> dist(n, p);
    return dist(*this);
  }

 private:
  std::uint64_t state_;
};

// Deterministic sub-seed for an indexed unit of work (a shot, a pole, a
// bootstrap resample), independent of evaluation order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  RngStream s = RngStream::derive(master, index);
  return s();
}

}  // namespace qst
