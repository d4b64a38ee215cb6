#include <doctest.h>

#include <cmath>
#include <vector>

#include "ee/concentration.hpp"
#include "ee/means.hpp"

using namespace ee;
using namespace ee::means;

TEST_SUITE("means") {
  TEST_CASE("sample statistics") {
    const std::vector<double> x{1, 2, 3, 4};
    const auto s = mean_stats(x);
    CHECK(s.theta_hat == doctest::Approx(2.5));
    CHECK(s.sigma_hat == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(s.n == 4);
    CHECK_THROWS(mean_stats(std::vector<double>{1.0}));
  }

  TEST_CASE("per-task bound by hand") {
    const MeanTaskStats def{1.0, 2.0, 100}, err{0.8, 1.0, 100};
    // 10 * 0.2 / 2 + 1 * z_{0.975} / 2
    CHECK(u_mean(def, err, ConfidenceLevel(0.05)) ==
          doctest::Approx(1.0 + 1.959963984540054 / 2.0).epsilon(1e-12));
    CHECK_THROWS(u_mean(def, MeanTaskStats{0.8, 1.0, 99}, ConfidenceLevel(0.05)));
    CHECK_THROWS(u_mean(MeanTaskStats{1.0, 0.0, 100}, err, ConfidenceLevel(0.05)));
  }

  TEST_CASE("simultaneous intervals use the largest task bound") {
    const std::vector<TaskPair> tasks{{{1.0, 2.0, 100}, {0.8, 1.0, 100}},
                                      {{0.0, 1.0, 100}, {0.0, 1.0, 100}},
                                      {{5.0, 1.0, 100}, {4.0, 3.0, 100}}};
    const ConfidenceLevel delta(0.05);
    const auto cis = simultaneous_cis(tasks, delta);
    double best = 0.0;
    std::size_t arg = 0;
    for (std::size_t h = 0; h < tasks.size(); ++h) {
      const double u = u_mean(tasks[h].def, tasks[h].err, delta);
      if (u > best) best = u, arg = h;
    }
    CHECK(cis.xi == doctest::Approx(best).epsilon(1e-12));
    CHECK(cis.argmax == arg);
    for (std::size_t h = 0; h < tasks.size(); ++h) {
      const double half = tasks[h].def.sigma_hat * cis.xi / 10.0;
      CHECK(cis.intervals[h].lo == doctest::Approx(tasks[h].def.theta_hat - half));
      CHECK(cis.intervals[h].hi == doctest::Approx(tasks[h].def.theta_hat + half));
    }
  }

  TEST_CASE("union-bound multiplier") {
    CHECK(union_bound_adjustment(500, ConfidenceLevel(0.1), false) ==
          doctest::Approx(3.540083799206145).epsilon(1e-12));
    CHECK(union_bound_adjustment(1, ConfidenceLevel(0.05), true) ==
          doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK_THROWS(union_bound_adjustment(0, ConfidenceLevel(0.05), true));
  }

  TEST_CASE("subgroup transform") {
    SubgroupSpec spec{[](std::span<const double> x) { return x[0] > 0; }, 0.25, 4.0};
    spec.validate();
    const std::vector<double> in{1.0}, out{-1.0};
    CHECK(subgroup_values(2.0, in, spec) == doctest::Approx(8.0));
    CHECK(subgroup_values(2.0, out, spec) == 0.0);
    SubgroupSpec bad{spec.membership, 0.1, 4.0};
    CHECK_THROWS(bad.validate());
  }

  TEST_CASE("correlated maximum experiment: perfect correlation and determinism") {
    const std::vector<double> alphas{0.0, 1.0};
    const ConfidenceLevel delta(0.1);
    const auto a = fig1_experiment(alphas, 40, 6, delta, 9, 1);
    const auto b = fig1_experiment(alphas, 40, 6, delta, 9, 3);
    REQUIRE(a.size() == 12);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].ee_bound == b[i].ee_bound);
      CHECK(a[i].true_max == b[i].true_max);
      CHECK(a[i].union_bound == doctest::Approx(union_bound_adjustment(40, delta, false)));
      // With alpha = 1 both splits see the same errors, so the bound is z_{1-delta}.
      if (a[i].alpha == 1.0) CHECK(a[i].ee_bound == doctest::Approx(1.2815515655446).epsilon(1e-12));
    }
    const auto sum = summarize_fig1(a);
    REQUIRE(sum.size() == 2);
    CHECK(sum[0].reps == 6);
  }

  TEST_CASE("simultaneous interval coverage runs and is reproducible") {
    const auto a = means_coverage_experiment(0.5, 10, 30, 8, ConfidenceLevel(0.1), 4, 1);
    const auto b = means_coverage_experiment(0.5, 10, 30, 8, ConfidenceLevel(0.1), 4, 2);
    REQUIRE(a.size() == 8);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].xi == b[i].xi);
      CHECK(a[i].covered == b[i].covered);
    }
  }
}
