#include <doctest.h>

#include <cmath>
#include <vector>

#include "ee/pipeline.hpp"
#include "ee/random.hpp"
#include "pipeline_states.hpp"

using namespace ee;
using namespace ee::bandit;
using ee::testing::count;

TEST_SUITE("pipeline") {
  TEST_CASE("split sizes and a single error epoch") {
    std::vector<InteractionRecord> log(10);
    for (std::size_t i = 0; i < 10; ++i) log[i] = {{0.0}, 0, 0.0, 1.0, i < 5 ? 1u : 2u, 2.0, 3.0};
    const auto s = pipeline_split(log, 0.5);
    CHECK(s.def.size() == 5);
    CHECK(s.err_elim.size() == 1);
    CHECK(s.err_con.size() == 1);
    CHECK(s.err_B.size() == 3);
    CHECK(s.err_epoch == 2);
    CHECK(s.alpha_err == 2.0);
    CHECK(s.M_err == 3.0);
    CHECK_FALSE(s.any_empty());
    log[9].epoch_id = 3;
    CHECK_THROWS(pipeline_split(log, 0.5));
    std::vector<InteractionRecord> two(2);
    CHECK(pipeline_split(two, 0.5).any_empty());
  }

  TEST_CASE("conformal set boundary is inclusive") {
    ContextArms c{{1, 1, 1, 0}, {0.75, 0.5, 0.25, 1.0}, 0};
    // Gap of arm 1 equals U / zeta = 0.25 exactly.
    CHECK(conformal_set(c, 0.125, 0.5) == std::vector<std::uint8_t>{1, 1, 0, 0});
    // Gap 0.4 against threshold 0.2 is excluded.
    ContextArms d{{1, 1}, {0.9, 0.5}, 0};
    CHECK(conformal_set(d, 0.1, 0.5) == std::vector<std::uint8_t>{1, 0});
    // Tiny zeta: every arm of g.
    CHECK(conformal_set(c, 0.125, 1e-9) == std::vector<std::uint8_t>{1, 1, 1, 0});
    CHECK_THROWS(conformal_set(c, 0.1, 0.0));
  }

  TEST_CASE("kernel worked examples") {
    // Two arms, gap 0.4, U 0.1, eta 1, beta_max 0.5: breakpoint 0.25.
    const ContextArms c{{1, 1}, {0.9, 0.5}, 0};
    const auto p = exploration_kernel(c, 0.1, 1.0, 0.5);
    CHECK(p[0] == doctest::Approx(0.875).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(0.125).epsilon(1e-15));
    // Case-2 lower bound (eta / |g|) U / gap = 0.125 is attained here.
    CHECK(p[1] >= 1.0 / 2.0 * 0.1 / 0.4 - 1e-15);
    // All gaps zero: uniform over g.
    const ContextArms flat{{1, 0, 1}, {0.3, 0.9, 0.3}, 0};
    const auto q = exploration_kernel(flat, 0.2, 2.0, 0.5);
    CHECK(q[0] == doctest::Approx(0.5));
    CHECK(q[1] == 0.0);
    CHECK(q[2] == doctest::Approx(0.5));
    CHECK_THROWS(exploration_kernel(c, 0.1, 3.0, 0.5));   // eta above K
    CHECK_THROWS(exploration_kernel(c, 0.1, 1.0, 1.0));   // beta_max outside (0, 1)
    CHECK_THROWS(exploration_kernel(ContextArms{{0, 0}, {0.1, 0.2}, 0}, 0.1, 1.0, 0.5));
  }

  TEST_CASE("empty conformal set falls back to the arm set") {
    // pi_con plays an arm outside g, every g arm is far below it.
    const ContextArms c{{0, 1, 1}, {1.0, 0.0, 0.0}, 0};
    const auto p = exploration_kernel(c, 0.01, 1.0, 0.5);
    CHECK(p[0] == 0.0);
    CHECK(p[1] == doctest::Approx(0.5));
    CHECK(p[2] == doctest::Approx(0.5));
  }

  TEST_CASE("cover and M bounds by formula") {
    const std::size_t K = 5;
    std::vector<ContextArms> all(100, ContextArms{std::vector<std::uint8_t>(K, 1),
                                                  std::vector<double>(K, 0.5), 0});
    const auto b = cover_and_M_bounds(all, {}, 0.2, 5.0, 0.5, ConfidenceLevel(0.05));
    CHECK(b.alpha_sets == doctest::Approx(5.0));  // g = C = all arms
    CHECK(b.M == doctest::Approx(5.0));           // 5 / (5 * 0.2)
    CHECK(b.alpha_tail == doctest::Approx(1.0));
    CHECK(b.alpha_deviation == doctest::Approx(0.6398706559).epsilon(1e-9));
    CHECK(b.alpha == doctest::Approx(b.alpha_sets + b.alpha_tail + b.alpha_deviation));
    CHECK(b.max_g == 5);
    // eta U above 1: M stays at max |g|.
    CHECK(cover_and_M_bounds(all, {}, 0.5, 5.0, 0.5, ConfidenceLevel(0.05)).M == doctest::Approx(5.0));
    CHECK(cover_and_M_bounds(all, {}, 0.01, 2.0, 0.5, ConfidenceLevel(0.05)).M ==
          doctest::Approx(250.0));
    CHECK_THROWS_AS(cover_and_M_bounds(all, {}, 0.0, 5.0, 0.5, ConfidenceLevel(0.05)),
                    UndefinedBoundError);
    CHECK_THROWS(cover_and_M_bounds({}, {}, 0.1, 5.0, 0.5, ConfidenceLevel(0.05)));
  }

  TEST_CASE("kernel invariants on random states") {
    Sampler s(make_rng(61, 0, 0));
    for (int rep = 0; rep < 500; ++rep) {
      const auto st = ee::testing::random_state(s, 8);
      for (const auto& c : st.contexts) {
        const auto p = exploration_kernel(c, st.U, st.eta, st.beta_max);
        const auto C = conformal_set(c, st.U, st.beta_max / st.eta);
        const double g = static_cast<double>(count(c.g_hat));
        double mass = 0.0;
        for (std::size_t a = 0; a < st.K; ++a) {
          mass += p[a];
          CHECK(p[a] >= 0.0);
          if (!c.g_hat[a]) CHECK(p[a] == 0.0);
          const double slack = 1e-12 * std::max(1.0, p[a]);
          if (C[a]) {
            CHECK(p[a] + slack >= (1 - st.beta_max) / static_cast<double>(count(C)) + st.beta_max / g);
            CHECK(p[a] + slack >= 1.0 / g);
          } else if (c.g_hat[a]) {
            const double gap = c.f_hat[c.pi_con] - c.f_hat[a];
            CHECK(p[a] + slack >= st.eta / g * st.U / gap);
            CHECK(p[a] + slack >= st.eta * st.U / g);
          }
        }
        CHECK(std::abs(mass - 1.0) <= 1e-9);
      }
    }
  }

  TEST_CASE("arm eliminator doubles gamma until good policies fit") {
    // One context; means 0, 0.5, 3 with unit widths.
    const std::vector<Context> xs{{1.0}};
    const PolicyClass cls(1, 3, {{0, 0, 1}, {0, 1, 0}, {1, 0, 0}});  // plays 2, 1, 0
    PipelineOracles o;
    o.R_elim = {1.0, 0.8, 0.0};
    o.pi_elim = 0;
    const std::vector<double> means{0.0, 0.5, 3.0};
    o.ci_mean = [means](std::span<const double>, std::size_t a) { return means[a]; };
    o.ci_width = [](std::span<const double>, std::size_t) { return 1.0; };
    const std::vector<std::size_t> all{0, 1, 2};
    // Policies 0 and 1 are good: arm 1 needs 0.5 + g >= 3 - g, so gamma = 2.
    const auto g = arm_eliminator(cls, all, o, 0.5, xs);
    CHECK(g.gamma == 2.0);
    CHECK_FALSE(g.all_arms);
    // Arm 0 also clears 3 - 2 at gamma = 2.
    CHECK(g.at(xs[0]) == std::vector<std::uint8_t>{1, 1, 1});
    // All three good: arm 0 needs gamma >= 1.5, so still 2.
    CHECK(arm_eliminator(cls, all, o, 2.0, xs).gamma == 2.0);
    // Zero widths never separate: past the cap every arm is kept.
    o.ci_width = [](std::span<const double>, std::size_t) { return 0.0; };
    const auto h = arm_eliminator(cls, all, o, 2.0, xs, 8.0);
    CHECK(h.all_arms);
    CHECK(h.at(xs[0]) == std::vector<std::uint8_t>{1, 1, 1});
  }

  TEST_CASE("policy error estimates keep the reference policy's width") {
    LinearBanditEnv env = LinearBanditEnv::random(2, 3, 0.05, 3);
    env.noise = NoiseKind::uniform;
    env.reward_offset = 0.5;
    env.reward_scale = 0.2;
    env.make_pool(16, 4);
    const auto cls = PolicyClass::random_linear(2, 3, 6, 5);
    Sampler s(make_rng(62, 0, 0));
    std::vector<InteractionRecord> log;
    for (int t = 0; t < 60; ++t) {
      std::size_t id;
      auto x = env.draw_context(s, &id);
      const std::size_t a = s.index(3);
      log.push_back({x, a, env.mean_reward(x, a) + env.draw_noise(s), 1.0 / 3.0, 1, 3.0, 3.0, id});
    }
    const Kernel uniform = [](std::span<const double>, std::size_t) { return 1.0 / 3.0; };
    PipelineOracles o;
    o.R_elim = {0.5, 0.6, 0.4, 0.55, 0.52, 0.3};
    o.pi_elim = 1;
    o.pi_con = 3;
    o.f_hat = [&env](std::span<const double> x, std::size_t a) { return env.mean_reward(x, a); };
    const std::vector<std::size_t> tilde{0, 2, 3, 5};
    const ConfidenceLevel d(0.05);
    const auto e = cb_elim_error(cls, tilde, log, o, uniform, 3.0, d);
    CHECK(e.members == std::vector<std::size_t>{0, 1, 2, 3, 5});
    CHECK(e.cover_hat == doctest::Approx(3.0));
    CHECK(e.width == doctest::Approx(freedman_ips_width(d, 60, 3.0, 3.0).value));
    CHECK(e.U >= e.width - 1e-12);
    const auto c = cb_con_error(cls, tilde, log, o, uniform, 3.0, d);
    const double extra = std::sqrt(2.0 * std::log(2.0 / 0.05) / 60.0);
    CHECK(c.width == doctest::Approx(freedman_ips_width(d.scaled(0.5), 60, 3.0, 3.0).value));
    CHECK(c.U >= c.width + extra - 1e-12);
    CHECK_THROWS_AS(cb_elim_error(cls, {}, log, o, uniform, 3.0, d), EmptyClassError);
  }

  TEST_CASE("end to end: single arm, determinism") {
    bandit::PipelineConfig cfg;
    cfg.T = 64;
    LinearBanditEnv one = LinearBanditEnv::random(2, 1, 0.05, 1);
    one.noise = NoiseKind::uniform;
    one.reward_offset = 0.5;
    one.reward_scale = 0.2;
    one.make_pool(8, 2);
    const auto rows = run_pipeline_epochs(one, PolicyClass::random_linear(2, 1, 4, 3), cfg, 5);
    for (const auto& r : rows) {
      CHECK(r.alpha_next == 1.0);
      CHECK(r.realized_cover == 1.0);
      CHECK(r.cum_regret == 0.0);
    }
    bandit::PipelineEnvConfig ec;
    const auto a = pipeline_experiment(ec, 2, cfg, 11, 1);
    const auto b = pipeline_experiment(ec, 2, cfg, 11, 2);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].alpha_next == b[i].alpha_next);
      CHECK(a[i].cum_regret == b[i].cum_regret);
      CHECK(a[i].error.empty());
    }
    CHECK_THROWS(run_pipeline_epochs(one, PolicyClass::random_linear(2, 1, 4, 3),
                                     bandit::PipelineConfig{3}, 5));
  }
}
