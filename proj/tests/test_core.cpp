#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ee/core.hpp"
#include "ee/oracles.hpp"
#include "ee/random.hpp"

using namespace ee;

namespace {

FinitePointwiseBound random_class(Sampler& s, std::size_t n, ErrorOrientation o) {
  FinitePointwiseBound pb;
  pb.orientation = o;
  for (std::size_t h = 0; h < n; ++h) {
    pb.theta_def.push_back(s.normal());
    pb.theta_err.push_back(s.normal());
  }
  std::vector<double> w(n);
  for (auto& v : w) v = s.uniform(0.5, 2.0);
  pb.width = [w](std::size_t h, ConfidenceLevel) { return w[h]; };
  return pb;
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("split sizes, order and index bookkeeping") {
    std::vector<int> data(11);
    std::iota(data.begin(), data.end(), 0);
    const auto seq = split_sample<int>(data, SplitSpec{0.5, SplitOrdering::sequential, 0});
    CHECK(seq.def_part.size() == 5);
    CHECK(seq.err_part.size() == 6);
    CHECK(seq.def_part.front() == 0);
    CHECK(seq.err_part.front() == 5);
    const auto sh = split_sample<int>(data, SplitSpec{0.5, SplitOrdering::shuffled, 3});
    std::vector<std::size_t> all(sh.def_index);
    all.insert(all.end(), sh.err_index.begin(), sh.err_index.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
    for (std::size_t i = 0; i < sh.def_part.size(); ++i)
      CHECK(sh.def_part[i] == static_cast<int>(sh.def_index[i]));
    // Same seed, same permutation.
    CHECK(split_sample<int>(data, SplitSpec{0.5, SplitOrdering::shuffled, 3}).def_index ==
          sh.def_index);
    CHECK_THROWS(split_sample<int>(std::vector<int>{1}, SplitSpec{0.1, SplitOrdering::sequential, 0}));
    CHECK_THROWS(split_sample<int>(data, SplitSpec{0.0, SplitOrdering::sequential, 0}));
  }

  TEST_CASE("combine_u follows the orientation") {
    CHECK(combine_u(ErrorOrientation::estimate_minus_target, 1.0, 2.0, 0.5) == 2.5);
    CHECK(combine_u(ErrorOrientation::target_minus_estimate, 1.0, 2.0, 0.5) == -0.5);
  }

  TEST_CASE("finite maximum equals the brute-force scan") {
    Sampler s(make_rng(5, 0, 0));
    for (int rep = 0; rep < 200; ++rep) {
      const std::size_t n = 1 + s.index(60);
      const auto o = rep % 2 ? ErrorOrientation::estimate_minus_target
                             : ErrorOrientation::target_minus_estimate;
      const auto pb = random_class(s, n, o);
      const ConfidenceLevel delta(0.1);
      std::vector<double> u(n);
      for (std::size_t h = 0; h < n; ++h) u[h] = pointwise_u(pb, h, delta);
      const auto brute = oracles::brute_max_error(u);
      const auto fast = max_error_bound(pb, delta);
      CHECK(fast.xi == brute.value);
      CHECK(fast.argmax == brute.index);
    }
  }

  TEST_CASE("empty or malformed classes are rejected") {
    FinitePointwiseBound pb;
    pb.width = FinitePointwiseBound::constant_width(1.0);
    CHECK_THROWS_AS(max_error_bound(pb, ConfidenceLevel(0.1)), EmptyClassError);
    pb.theta_def = {1.0, 2.0};
    pb.theta_err = {1.0};
    CHECK_THROWS(max_error_bound(pb, ConfidenceLevel(0.1)));
    pb.theta_err = {1.0, 2.0};
    CHECK_THROWS(pointwise_u(pb, 2, ConfidenceLevel(0.1)));
    pb.width = FinitePointwiseBound::constant_width(-1.0);
    CHECK_THROWS(max_error_bound(pb, ConfidenceLevel(0.1)));
  }

  TEST_CASE("localization: nested classes, non-increasing bound, threshold rule") {
    Sampler s(make_rng(6, 0, 0));
    for (int rep = 0; rep < 200; ++rep) {
      const std::size_t n = 2 + s.index(80);
      auto pb = random_class(s, n, ErrorOrientation::target_minus_estimate);
      // Task 0 has u = width > 0 and theta_def = 0, so it survives every step when c <= 0.
      pb.theta_def[0] = 0.0;
      pb.theta_err[0] = 0.0;
      const double c = -s.uniform(0.0, 1.0);
      const auto loc = localize(pb, c, ConfidenceLevel(0.1));
      const auto& t = loc.trace;
      REQUIRE(t.xi_sequence.size() == loc.members.size());
      CHECK(t.xi_sequence.front() == max_error_bound(pb, ConfidenceLevel(0.1)).xi);
      for (std::size_t k = 1; k < t.xi_sequence.size(); ++k) {
        CHECK(t.xi_sequence[k] <= t.xi_sequence[k - 1]);
        CHECK(t.xi_sequence[k] == std::min(t.raw_xi[k], t.xi_sequence[k - 1]));
        CHECK(t.thresholds[k] == t.xi_sequence[k - 1] - c);
        for (std::size_t h = 0; h < n; ++h) {
          if (loc.members[k][h]) CHECK(loc.members[k - 1][h]);
          CHECK(static_cast<bool>(loc.members[k][h]) ==
                (loc.members[k - 1][h] && t.contains(k, pb.theta_def[h])));
        }
      }
      // Each raw maximum is the brute-force max over its class.
      for (std::size_t k = 0; k < t.raw_xi.size(); ++k) {
        double best = -INFINITY;
        for (std::size_t h = 0; h < n; ++h)
          if (loc.members[k][h]) best = std::max(best, pointwise_u(pb, h, ConfidenceLevel(0.1)));
        CHECK(t.raw_xi[k] == best);
      }
      CHECK(t.stop_reason != StopReason::max_iterations);
    }
  }

  TEST_CASE("a lower bound above every defining estimate empties the class") {
    FinitePointwiseBound pb;
    pb.theta_def = {-5.0, -6.0};
    pb.theta_err = {0.0, 0.0};
    pb.width = FinitePointwiseBound::constant_width(0.1);
    pb.orientation = ErrorOrientation::target_minus_estimate;
    CHECK_THROWS_AS(localize(pb, 10.0, ConfidenceLevel(0.1)), EmptyLocalizedClassError);
  }

  TEST_CASE("parametric maximum matches a fine grid in one dimension") {
    ParametricPointwiseBound pb;
    pb.theta_def = [](std::span<const double> h) { return std::sin(3 * h[0]); };
    pb.theta_err = [](std::span<const double> h) { return 0.3 * h[0] * h[0]; };
    pb.width = [](std::span<const double>, ConfidenceLevel) { return 0.2; };
    const Box box({-2.0}, {2.0});
    SolverConfig cfg;
    cfg.seed = 3;
    const auto r = max_error_bound(box, pb, ConfidenceLevel(0.1), cfg);
    double grid = -INFINITY;
    for (int i = 0; i <= 100000; ++i) {
      const double x = -2.0 + 4.0 * i / 100000.0;
      grid = std::max(grid, 0.2 + std::sin(3 * x) - 0.3 * x * x);
    }
    CHECK(std::abs(r.xi - grid) <= 1e-6);
    CHECK(box.contains(r.argmax));
  }
}
