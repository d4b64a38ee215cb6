#include "ee/random.hpp"

#include <cmath>

namespace ee {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index, std::uint64_t stream) {
  std::uint64_t s = base;
  std::uint64_t h = splitmix64(s);
  s = h ^ index;
  h = splitmix64(s);
  s = h ^ stream;
  return splitmix64(s);
}

Rng make_rng(std::uint64_t base, std::uint64_t index, std::uint64_t stream) {
  std::uint64_t s = derive_seed(base, index, stream);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(splitmix64(s)),
                    static_cast<std::uint32_t>(splitmix64(s))};
  return Rng(seq);
}

std::vector<double> Sampler::normal_vector(std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = normal();
  return v;
}

std::vector<double> Sampler::unit_sphere(std::size_t d) {
  for (;;) {
    std::vector<double> v = normal_vector(d);
    double s = 0.0;
    for (double x : v) s += x * x;
    if (s > 0.0) {
      const double r = std::sqrt(s);
      for (auto& x : v) x /= r;
      return v;
    }
  }
}

}  // namespace ee
