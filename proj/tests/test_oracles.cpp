#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ee/oracles.hpp"
#include "ee/random.hpp"

using namespace ee;
using oracles::FunctionTable;

namespace {

// Full enumeration of the 2^n sign vectors, no symmetry shortcut.
double naive_rademacher(const FunctionTable& t) {
  const std::size_t n = t.cols();
  double total = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double best = 0.0;
    for (const auto& row : t.values) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += ((mask >> i) & 1u) ? row[i] : -row[i];
      best = std::max(best, std::abs(s) / static_cast<double>(n));
    }
    total += best;
  }
  return total / static_cast<double>(std::size_t{1} << n);
}

FunctionTable random_table(Sampler& s, std::size_t rows, std::size_t cols) {
  FunctionTable t;
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<double> row(cols);
    for (auto& v : row) v = s.uniform(-1, 1);
    t.values.push_back(std::move(row));
  }
  return t;
}

}  // namespace

TEST_SUITE("oracles") {
  TEST_CASE("exact Rademacher hand values") {
    CHECK(oracles::exact_rademacher({{{0.7}}, 1.0}) == doctest::Approx(0.7));
    CHECK(oracles::exact_rademacher({{{1.0, 1.0}}, 1.0}) == doctest::Approx(0.5));
    // {(1, 1), (1, -1)}: every sign vector reaches |sum| = 2.
    CHECK(oracles::exact_rademacher({{{1.0, 1.0}, {1.0, -1.0}}, 1.0}) == doctest::Approx(1.0));
  }

  TEST_CASE("exact Rademacher matches full enumeration") {
    Sampler s(make_rng(21, 0, 0));
    for (int rep = 0; rep < 50; ++rep) {
      const auto t = random_table(s, 1 + s.index(6), 1 + s.index(10));
      CHECK(oracles::exact_rademacher(t) == doctest::Approx(naive_rademacher(t)).epsilon(1e-12));
    }
  }

  TEST_CASE("exact Rademacher invariances") {
    Sampler s(make_rng(22, 0, 0));
    for (int rep = 0; rep < 30; ++rep) {
      const auto t = random_table(s, 1 + s.index(5), 2 + s.index(8));
      const double base = oracles::exact_rademacher(t);
      auto dup = t;
      dup.values.push_back(t.values.front());
      CHECK(oracles::exact_rademacher(dup) == doctest::Approx(base).epsilon(1e-12));
      auto perm = t;
      std::vector<std::size_t> order(t.cols());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::shuffle(order.begin(), order.end(), s.engine());
      for (std::size_t r = 0; r < t.rows(); ++r)
        for (std::size_t i = 0; i < order.size(); ++i) perm.values[r][i] = t.values[r][order[i]];
      CHECK(oracles::exact_rademacher(perm) == doctest::Approx(base).epsilon(1e-12));
      auto other = random_table(s, 1 + s.index(4), t.cols());
      auto both = t;
      both.values.insert(both.values.end(), other.values.begin(), other.values.end());
      const double u = oracles::exact_rademacher(both);
      CHECK(u >= base - 1e-15);
      CHECK(u >= oracles::exact_rademacher(other) - 1e-15);
    }
  }

  TEST_CASE("table validation") {
    CHECK_THROWS(oracles::exact_rademacher({{}, 1.0}));
    CHECK_THROWS(oracles::exact_rademacher({{{1.0, 2.0}}, 1.0}));
    CHECK_THROWS(oracles::exact_rademacher({{{1.0, 0.0}, {1.0}}, 1.0}));
    CHECK_THROWS(oracles::exact_rademacher({{std::vector<double>(21, 0.1)}, 1.0}));
  }

  TEST_CASE("population Rademacher agrees with sampling") {
    Sampler s(make_rng(23, 0, 0));
    const auto domain = random_table(s, 3, 3);
    const std::vector<double> probs{0.2, 0.5, 0.3};
    const std::size_t n = 6;
    const double exact = oracles::population_rademacher(domain, probs, n);
    std::discrete_distribution<std::size_t> law(probs.begin(), probs.end());
    const int draws = 20000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < draws; ++i) {
      FunctionTable sample;
      for (const auto& row : domain.values) sample.values.emplace_back();
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k = law(s.engine());
        for (std::size_t r = 0; r < domain.rows(); ++r)
          sample.values[r].push_back(domain.values[r][k]);
      }
      const double v = oracles::exact_rademacher(sample);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sum2 / draws - mean * mean) / draws);
    CHECK(std::abs(mean - exact) <= 4 * se);
    // A point mass reduces to the empirical value of that single column repeated.
    const std::vector<double> point{0.0, 1.0, 0.0};
    FunctionTable repeated;
    for (const auto& row : domain.values) repeated.values.emplace_back(n, row[1]);
    CHECK(oracles::population_rademacher(domain, point, n) ==
          doctest::Approx(oracles::exact_rademacher(repeated)).epsilon(1e-12));
  }

  TEST_CASE("series normal CDF against erfc") {
    for (double x = -8.0; x <= 8.0; x += 0.37) {
      const double ref = 0.5 * std::erfc(-x / std::sqrt(2.0));
      CHECK(std::abs(static_cast<double>(oracles::series_normal_cdf(x)) - ref) <= 1e-15);
    }
    CHECK(static_cast<double>(oracles::series_normal_cdf(0.0L)) == 0.5);
  }

  TEST_CASE("brute maximum keeps the first of tied entries") {
    const std::vector<double> e{1.0, 3.0, 3.0, -2.0};
    const auto m = oracles::brute_max_error(e);
    CHECK(m.value == 3.0);
    CHECK(m.index == 1);
    CHECK_THROWS(oracles::brute_max_error(std::vector<double>{}));
  }
}
