#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "ee/excess_risk.hpp"
#include "ee/random.hpp"

using namespace ee;
using namespace ee::excess;

namespace {

std::vector<LabeledSample> linear_data(Sampler& s, std::size_t n, std::span<const double> beta,
                                       double noise) {
  std::vector<LabeledSample> out(n);
  for (auto& smp : out) {
    smp.features = s.unit_sphere(beta.size());
    double m = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) m += smp.features[j] * beta[j];
    smp.label = m + s.uniform(-noise, noise);
  }
  return out;
}

// Monte-Carlo excess risk with its standard error.
std::pair<double, double> mc_excess(Sampler& s, std::span<const double> bh,
                                    std::span<const double> b, double clip, int draws) {
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const auto x = s.unit_sphere(b.size());
    double ph = 0.0, m = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) ph += x[j] * bh[j], m += x[j] * b[j];
    const double pred = std::clamp(ph, -clip, clip), best = std::clamp(m, -clip, clip);
    const double v = (pred - m) * (pred - m) - (best - m) * (best - m);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / draws;
  return {mean, std::sqrt((sum2 / draws - mean * mean) / draws)};
}

}  // namespace

TEST_SUITE("excess") {
  TEST_CASE("VC baseline value") {
    CHECK(vc_baseline(10, 250, ConfidenceLevel(0.05)) == doctest::Approx(0.1039658582).epsilon(1e-9));
    CHECK_THROWS(vc_baseline(10, 0, ConfidenceLevel(0.05)));
  }

  TEST_CASE("least squares solves the normal equations") {
    Sampler s(make_rng(31, 0, 0));
    const std::vector<double> beta{0.3, -0.2, 0.1, 0.25};
    for (double ridge : {0.0, 0.5}) {
      const auto data = linear_data(s, 80, beta, 0.5);
      const auto w = fit_erm_linear(data, ridge);
      Eigen::MatrixXd x(80, 4);
      Eigen::VectorXd y(80);
      for (int i = 0; i < 80; ++i) {
        for (int j = 0; j < 4; ++j) x(i, j) = data[i].features[j];
        y(i) = data[i].label;
      }
      const Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(w.data(), 4);
      const Eigen::VectorXd r = x.transpose() * (x * wv - y) + ridge * wv;
      CHECK(r.norm() <= 1e-8);
    }
    std::vector<LabeledSample> degenerate(3, LabeledSample{{1.0, 1.0}, 1.0, 0});
    CHECK_THROWS(fit_erm_linear(degenerate, 0.0));
  }

  TEST_CASE("loss range and per-sample loss") {
    const ClippedLinearClass cls{2, 1, 1.0, 1.0, 1.0};
    CHECK(cls.loss_range() == 4.0);
    const LabeledSample smp{{3.0, 0.0}, -1.0, 0};
    const std::vector<double> w{1.0, 0.0};
    CHECK(cls.sample_loss(smp, w) == doctest::Approx(4.0));  // prediction clipped to 1
  }

  TEST_CASE("per-model bound by hand") {
    Sampler s(make_rng(32, 0, 0));
    const std::vector<double> beta{0.2, 0.1, -0.3};
    const auto def_s = linear_data(s, 50, beta, 0.4), err_s = linear_data(s, 50, beta, 0.4);
    const Dataset def(def_s, 3), err(err_s, 3);
    const ClippedLinearClass cls{3, 1, 1.0, 1.0, 1.0};
    const std::vector<double> g_def{0.25, 0.05, -0.2}, g{0.0, 0.0, 0.0};
    double ld_def = 0, ld_g = 0, le_def = 0, le_g = 0;
    for (const auto& x : def_s) ld_def += cls.sample_loss(x, g_def), ld_g += cls.sample_loss(x, g);
    for (const auto& x : err_s) le_def += cls.sample_loss(x, g_def), le_g += cls.sample_loss(x, g);
    const auto t = theta_hats(cls, g, g_def, def, err);
    CHECK(t.theta_def == doctest::Approx((ld_def - ld_g) / 50).epsilon(1e-12));
    CHECK(t.theta_err == doctest::Approx((le_def - le_g) / 50).epsilon(1e-12));
    const double width = 2 * 4.0 * std::sqrt(std::log(20.0) / 100.0);
    CHECK(u_excess(cls, g, g_def, def, err, ConfidenceLevel(0.05)) ==
          doctest::Approx(width + t.theta_err - t.theta_def).epsilon(1e-12));
    const Dataset short_err(std::span<const LabeledSample>(err_s).first(40), 3);
    CHECK_THROWS(u_excess(cls, g, g_def, def, short_err, ConfidenceLevel(0.05)));
  }

  TEST_CASE("excess risk on the sphere: closed form and clipped quadrature vs sampling") {
    Sampler s(make_rng(33, 0, 0));
    const std::vector<double> beta{0.3, -0.2, 0.1, 0.25, 0.0};
    const std::vector<double> small{0.25, -0.1, 0.2, 0.2, 0.05};
    const double closed = true_excess_risk_sphere(small, beta, 1.0);
    double sq = 0.0;
    for (std::size_t j = 0; j < 5; ++j) sq += (small[j] - beta[j]) * (small[j] - beta[j]);
    CHECK(closed == doctest::Approx(sq / 5.0).epsilon(1e-14));
    const auto [mc0, se0] = mc_excess(s, small, beta, 1.0, 1000000);
    CHECK(std::abs(mc0 - closed) <= 4 * se0);

    // Large coefficients force clipping and the quadrature path.
    const std::vector<double> big{2.0, -1.5, 0.5, 1.0, 0.0};
    const double quad = true_excess_risk_sphere(big, beta, 0.3);
    const auto [mc1, se1] = mc_excess(s, big, beta, 0.3, 1000000);
    CHECK(std::abs(mc1 - quad) <= 4 * se1 + 1e-5);
    CHECK(true_excess_risk_sphere(beta, beta, 0.3) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  }

  TEST_CASE("finite model class bound") {
    FiniteModelLosses fl;
    fl.loss_range = 1.0;
    fl.g_def = 0;
    fl.def_losses.resize(3, 4);
    fl.err_losses.resize(3, 4);
    fl.def_losses << 0.1, 0.2, 0.1, 0.2,  //
        0.3, 0.3, 0.3, 0.3,               //
        0.9, 0.8, 0.9, 0.8;
    fl.err_losses << 0.2, 0.2, 0.2, 0.2,  //
        0.1, 0.1, 0.1, 0.1,               //
        0.9, 0.9, 0.9, 0.9;
    const auto r = excess_risk_bound(fl, ConfidenceLevel(0.05));
    const double width = 2.0 * std::sqrt(std::log(20.0) / 8.0);
    CHECK(r.width == doctest::Approx(width));
    // theta_def = (0, -0.15, -0.7); theta_err = (0, 0.1, -0.7).
    CHECK(r.theta_def[1] == doctest::Approx(-0.15));
    CHECK(r.localization.trace.xi_sequence.front() == doctest::Approx(width + 0.25));
    CHECK(r.localized_valid);
    CHECK(r.bound_localized <= r.localization.trace.xi_sequence.front());
    fl.err_losses(0, 0) = 1.5;
    CHECK_THROWS(excess_risk_bound(fl, ConfidenceLevel(0.05)));
  }

  TEST_CASE("parametric bound: trace properties on a small instance") {
    Sampler s(make_rng(34, 0, 0));
    const std::vector<double> beta{0.3, -0.2, 0.1};
    const auto data = linear_data(s, 200, beta, 0.5);
    const std::span all(data);
    const Dataset def(all.first(100), 3), err(all.subspan(100), 3);
    const auto g_def = fit_erm_linear(all.first(100), 0.0);
    const ClippedLinearClass cls{3, 1, 1.0, 1.0, 1.0};
    ExcessRiskConfig cfg;
    cfg.solver.seed = 1;
    const auto r = excess_risk_bound(cls, g_def, def, err, ConfidenceLevel(0.05), cfg);
    const auto& xs = r.trace.xi_sequence;
    CHECK(std::is_sorted(xs.rbegin(), xs.rend()));
    CHECK(r.bound_localized == doctest::Approx(r.trace.xi()));
    // The defining fit itself has u = width, so the bound cannot fall below it.
    CHECK(r.bound_localized >= r.width - 1e-12);
    CHECK(r.vc_baseline == doctest::Approx(vc_baseline(3, 100, ConfidenceLevel(0.05))));
  }
}
