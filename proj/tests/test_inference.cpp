#include <doctest.h>

#include <cmath>
#include <vector>

#include "ee/inference.hpp"
#include "ee/random.hpp"

using namespace ee;
using namespace ee::inference;
using means::MeanTaskStats;
using means::TaskPair;

namespace {

std::vector<TaskPair> random_tasks(Sampler& s, std::size_t n_tasks, double shift) {
  std::vector<TaskPair> out;
  for (std::size_t h = 0; h < n_tasks; ++h) {
    const double mu = h % 3 == 0 ? shift : 0.0;
    out.push_back({{mu + 0.1 * s.normal(), s.uniform(0.5, 2.0), 100},
                   {mu + 0.1 * s.normal(), s.uniform(0.5, 2.0), 100}});
  }
  return out;
}

}  // namespace

TEST_SUITE("inference") {
  TEST_CASE("default weights by hand") {
    const std::vector<MeanTaskStats> st{{0.5, 1.0, 100}, {0.1, 1.0, 100}, {-2.0, 3.0, 100}};
    const auto w = default_weights(st, ConfidenceLevel(0.05));
    // z_{0.95} / 10 = 0.1645.
    CHECK(w.iota == std::vector<std::uint8_t>{1, 0, 0});
    CHECK(w.b[0] == doctest::Approx(1.0));
    CHECK(w.b[2] == doctest::Approx(1.5));
    const auto u = unit_weights(3);
    CHECK(u.b == std::vector<double>{1.0, 1.0, 1.0});
    WeightPair bad{{1}, {0.0}};
    CHECK_THROWS(bad.validate(1));
    CHECK_THROWS(u.validate(2));
  }

  TEST_CASE("rejection set: threshold rule and empty screening") {
    Sampler s(make_rng(41, 0, 0));
    const auto tasks = random_tasks(s, 30, 1.0);
    const ConfidenceLevel delta(0.05);
    const auto w = unit_weights(tasks.size());
    const auto r = reject_set(tasks, w, delta);
    REQUIRE(r.xi_w.has_value());
    double xi = 0.0;
    for (const auto& t : tasks) xi = std::max(xi, means::u_mean(t.def, t.err, delta));
    CHECK(*r.xi_w == doctest::Approx(xi).epsilon(1e-12));
    std::vector<std::size_t> expect;
    for (std::size_t h = 0; h < tasks.size(); ++h)
      if (tasks[h].def.theta_hat > tasks[h].def.sigma_hat / 10.0 * xi) expect.push_back(h);
    CHECK(r.rejected == expect);
    CHECK_FALSE(expect.empty());

    WeightPair none{std::vector<std::uint8_t>(tasks.size(), 0), std::vector<double>(tasks.size(), 1.0)};
    const auto e = reject_set(tasks, none, delta);
    CHECK_FALSE(e.xi_w.has_value());
    CHECK(e.rejected.empty());
  }

  TEST_CASE("rejection set is invariant to a uniform weight rescaling") {
    Sampler s(make_rng(42, 0, 0));
    for (int rep = 0; rep < 50; ++rep) {
      const auto tasks = random_tasks(s, 20, 0.5);
      std::vector<MeanTaskStats> def;
      for (const auto& t : tasks) def.push_back(t.def);
      auto w = default_weights(def, ConfidenceLevel(0.05));
      const auto a = reject_set(tasks, w, ConfidenceLevel(0.05));
      for (auto& b : w.b) b *= 4.0;
      const auto b = reject_set(tasks, w, ConfidenceLevel(0.05));
      CHECK(a.rejected == b.rejected);
      if (a.xi_w) CHECK(*b.xi_w == 4.0 * *a.xi_w);
    }
  }

  TEST_CASE("switched and k-fold bounds") {
    const std::vector<double> f1{1.0, 2.0}, f2{3.0};
    std::vector<double> seen;
    const auto sb = switched_bound(
        f1, f2,
        [&](const std::vector<double>& def, const std::vector<double>& err, ConfidenceLevel d) {
          seen.push_back(d.value());
          return def.size() * 10.0 + err.size();
        },
        ConfidenceLevel(0.1));
    CHECK(sb.xi_12 == 21.0);
    CHECK(sb.xi_21 == 12.0);
    CHECK(sb.xi_min == 12.0);
    CHECK(seen == std::vector<double>{0.05, 0.05});
    CHECK_THROWS(switched_bound(std::vector<double>{}, f2,
                                [](auto&, auto&, ConfidenceLevel) { return 0.0; },
                                ConfidenceLevel(0.1)));

    std::vector<double> deltas;
    const double k = kfold_bound(
        4, [&](std::size_t i, ConfidenceLevel d) {
          deltas.push_back(d.value());
          return 5.0 - static_cast<double>(i % 3);
        },
        ConfidenceLevel(0.2));
    CHECK(k == 3.0);
    for (double d : deltas) CHECK(d == doctest::Approx(0.05));
    CHECK_THROWS(kfold_bound(0, [](std::size_t, ConfidenceLevel) { return 0.0; },
                             ConfidenceLevel(0.2)));
  }

  TEST_CASE("experiments are reproducible across job counts") {
    const auto a = crossfit_experiment(0.5, 40, 6, ConfidenceLevel(0.1), 3, 1);
    const auto b = crossfit_experiment(0.5, 40, 6, ConfidenceLevel(0.1), 3, 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].xi_min == b[i].xi_min);
      CHECK(a[i].xi_min == std::min(a[i].xi_12, a[i].xi_21));
    }
    const auto m = multitest_experiment(WeightChoice::screened, 20, 30, 5, ConfidenceLevel(0.05), 3, 2);
    CHECK(m.size() == 5);
    for (const auto& r : m) {
      CHECK(r.rescale_invariant);
      CHECK(r.fwer == (r.n_rejected > 0));
    }
  }
}
