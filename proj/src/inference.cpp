#include "ee/inference.hpp"

#include <cmath>

#include "ee/core.hpp"
#include "ee/parallel.hpp"
#include "ee/random.hpp"

namespace ee::inference {

void WeightPair::validate(std::size_t n_tasks) const {
  if (iota.size() != n_tasks || b.size() != n_tasks)
    throw std::invalid_argument("weight pair must have one entry per task");
  for (std::size_t h = 0; h < n_tasks; ++h)
    if (iota[h] && !(b[h] > 0.0 && std::isfinite(b[h])))
      throw std::invalid_argument("screened tasks need a positive finite weight");
}

WeightPair default_weights(std::span<const means::MeanTaskStats> def_stats, ConfidenceLevel delta) {
  const double z = normal_quantile(1.0 - delta.value());
  WeightPair w;
  w.iota.reserve(def_stats.size());
  w.b.reserve(def_stats.size());
  for (const auto& s : def_stats) {
    const double rn = std::sqrt(static_cast<double>(s.n));
    w.iota.push_back(s.theta_hat > s.sigma_hat * z / rn ? 1 : 0);
    const double a = std::abs(s.theta_hat);
    w.b.push_back(s.sigma_hat * (a > 1.0 ? 1.0 / a : 1.0));
  }
  return w;
}

WeightPair unit_weights(std::size_t n_tasks) {
  return {std::vector<std::uint8_t>(n_tasks, 1), std::vector<double>(n_tasks, 1.0)};
}

RejectResult reject_set(std::span<const means::TaskPair> tasks, const WeightPair& weights,
                        ConfidenceLevel delta) {
  weights.validate(tasks.size());
  std::vector<std::size_t> screened;
  for (std::size_t h = 0; h < tasks.size(); ++h)
    if (weights.iota[h]) screened.push_back(h);
  RejectResult out;
  if (screened.empty()) return out;

  // b(h) u(h) split into its gap and width parts for the engine.
  const double z = normal_quantile(1.0 - delta.value() / 2.0);
  FinitePointwiseBound pb;
  std::vector<double> width(screened.size());
  pb.theta_def.resize(screened.size());
  pb.theta_err.assign(screened.size(), 0.0);
  for (std::size_t i = 0; i < screened.size(); ++i) {
    const auto& t = tasks[screened[i]];
    const double b = weights.b[screened[i]];
    if (t.def.n != t.err.n) throw std::invalid_argument("u_mean needs equal sample counts");
    if (!(t.def.sigma_hat > 0.0))
      throw std::domain_error("u_mean is undefined for a zero defining standard deviation");
    const double rn = std::sqrt(static_cast<double>(t.def.n));
    pb.theta_def[i] = b * (rn * std::abs(t.def.theta_hat - t.err.theta_hat) / t.def.sigma_hat);
    width[i] = b * (t.err.sigma_hat * z / t.def.sigma_hat);
  }
  pb.width = [&width](std::size_t i, ConfidenceLevel) { return width[i]; };
  const double xi = max_error_bound(pb, delta).xi;
  out.xi_w = xi;
  for (std::size_t h : screened) {
    const auto& d = tasks[h].def;
    const double threshold =
        (d.sigma_hat / std::sqrt(static_cast<double>(d.n))) * xi / weights.b[h];
    if (d.theta_hat > threshold) out.rejected.push_back(h);
  }
  return out;
}

namespace {

// One split of the finite Gaussian class: sqrt(alpha) Z_0 + sqrt(1 - alpha) Z_h.
std::vector<double> correlated_draw(Sampler& s, double alpha, std::size_t n_tasks) {
  const double shared = std::sqrt(alpha) * s.normal();
  const double own = std::sqrt(1.0 - alpha);
  std::vector<double> v(n_tasks);
  for (auto& x : v) x = shared + own * s.normal();
  return v;
}

double gaussian_class_bound(const std::vector<double>& def, const std::vector<double>& err,
                            ConfidenceLevel delta) {
  FinitePointwiseBound pb;
  pb.theta_def = def;
  pb.theta_err = err;
  pb.width = FinitePointwiseBound::constant_width(normal_quantile(1.0 - delta.value()));
  return max_error_bound(pb, delta).xi;
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
}

}  // namespace

std::vector<FiniteCoverageRow> finite_coverage_experiment(double alpha, std::size_t n_tasks,
                                                          std::size_t reps, ConfidenceLevel delta,
                                                          std::uint64_t seed, unsigned jobs) {
  check_alpha(alpha);
  if (n_tasks < 1 || reps < 1) throw std::invalid_argument("invalid finite coverage config");
  auto per_rep = [&](std::size_t rep) {
    Sampler s(make_rng(seed, rep));
    const auto def = correlated_draw(s, alpha, n_tasks);
    const auto err = correlated_draw(s, alpha, n_tasks);
    const double xi = gaussian_class_bound(def, err, delta);
    const double truth = *std::max_element(def.begin(), def.end());
    return FiniteCoverageRow{alpha, rep, xi, truth, xi >= truth};
  };
  return map_replicates(reps, jobs, per_rep);
}

std::vector<CrossfitRow> crossfit_experiment(double alpha, std::size_t n_tasks, std::size_t reps,
                                             ConfidenceLevel delta, std::uint64_t seed,
                                             unsigned jobs) {
  check_alpha(alpha);
  if (n_tasks < 1 || reps < 1) throw std::invalid_argument("invalid crossfit config");
  auto per_rep = [&](std::size_t rep) {
    Sampler s(make_rng(seed, rep));
    const auto f1 = correlated_draw(s, alpha, n_tasks);
    const auto f2 = correlated_draw(s, alpha, n_tasks);
    const SwitchedBound sw = switched_bound(f1, f2, gaussian_class_bound, delta);
    const double single = gaussian_class_bound(f1, f2, delta);
    const auto& winner = sw.xi_12 <= sw.xi_21 ? f1 : f2;
    const double truth = *std::max_element(winner.begin(), winner.end());
    return CrossfitRow{alpha, rep, sw.xi_12, sw.xi_21, sw.xi_min, single, truth,
                       sw.xi_min >= truth};
  };
  return map_replicates(reps, jobs, per_rep);
}

std::string to_string(WeightChoice w) { return w == WeightChoice::unit ? "unit" : "screened"; }

std::vector<MultitestRow> multitest_experiment(WeightChoice weights, std::size_t n_tasks,
                                               std::size_t n, std::size_t reps,
                                               ConfidenceLevel delta, std::uint64_t seed,
                                               unsigned jobs) {
  if (n < 2 || n_tasks < 1 || reps < 1) throw std::invalid_argument("invalid multitest config");
  auto per_rep = [&](std::size_t rep) {
    Sampler s(make_rng(seed, rep));
    std::vector<means::TaskPair> tasks(n_tasks);
    std::vector<double> y(n);
    for (auto& t : tasks) {
      for (auto& v : y) v = s.normal();
      t.def = means::mean_stats(y);
      for (auto& v : y) v = s.normal();
      t.err = means::mean_stats(y);
    }
    std::vector<means::MeanTaskStats> defs;
    defs.reserve(n_tasks);
    for (const auto& t : tasks) defs.push_back(t.def);
    WeightPair w = weights == WeightChoice::unit ? unit_weights(n_tasks) : default_weights(defs, delta);
    const RejectResult r = reject_set(tasks, w, delta);
    for (auto& b : w.b) b *= 4.0;
    const RejectResult scaled = reject_set(tasks, w, delta);
    const bool same_xi = r.xi_w.has_value() == scaled.xi_w.has_value() &&
                         (!r.xi_w || *scaled.xi_w == 4.0 * *r.xi_w);
    std::size_t screened = 0;
    for (auto i : w.iota) screened += i;
    return MultitestRow{weights,
                        rep,
                        !r.rejected.empty(),
                        r.rejected.size(),
                        screened,
                        r.xi_w.value_or(std::numeric_limits<double>::quiet_NaN()),
                        same_xi && r.rejected == scaled.rejected};
  };
  return map_replicates(reps, jobs, per_rep);
}

}  // namespace ee::inference
