#pragma once
// Reproducible random streams. A stream is identified by (base seed, replicate
// index, stream tag); the three are mixed with SplitMix64 into a seed for a
// std::mt19937_64, so replicates can be generated in any order.

#include <cstdint>
#include <random>
#include <vector>

namespace ee {

using Rng = std::mt19937_64;

// One SplitMix64 step: advances state and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index, std::uint64_t stream = 0);

Rng make_rng(std::uint64_t base, std::uint64_t index, std::uint64_t stream = 0);

// Convenience draws on top of an engine.
class Sampler {
 public:
  explicit Sampler(Rng rng) : rng_(std::move(rng)) {}
  double normal() { return normal_(rng_); }
  double uniform() { return uniform_(rng_); }  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(rng_); }
  std::size_t index(std::size_t n) {  // uniform on {0, ..., n-1}
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }
  std::vector<double> normal_vector(std::size_t n);
  // Standard normal vector scaled to unit Euclidean norm.
  std::vector<double> unit_sphere(std::size_t d);
  Rng& engine() { return rng_; }

 private:
  Rng rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace ee
