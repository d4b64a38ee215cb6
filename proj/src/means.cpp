#include "ee/means.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "ee/core.hpp"
#include "ee/kernels.hpp"
#include "ee/parallel.hpp"
#include "ee/random.hpp"

namespace ee::means {

MeanTaskStats mean_stats(std::span<const double> sample) {
  if (sample.size() < 2) throw std::invalid_argument("mean_stats needs at least two samples");
  const double n = static_cast<double>(sample.size());
  const double mean = kernels::sum(sample) / n;
  const double ss = kernels::sum_sq_dev(sample, mean);
  return {mean, std::sqrt(ss / (n - 1.0)), sample.size()};
}

double u_mean(const MeanTaskStats& def, const MeanTaskStats& err, ConfidenceLevel delta) {
  if (def.n != err.n) throw std::invalid_argument("u_mean needs equal sample counts");
  if (!(def.sigma_hat > 0.0))
    throw std::domain_error("u_mean is undefined for a zero defining standard deviation");
  const double z = normal_quantile(1.0 - delta.value() / 2.0);
  const double rn = std::sqrt(static_cast<double>(def.n));
  return rn * std::abs(def.theta_hat - err.theta_hat) / def.sigma_hat +
         err.sigma_hat * z / def.sigma_hat;
}

SimultaneousCIs simultaneous_cis(std::span<const TaskPair> tasks, ConfidenceLevel delta) {
  if (tasks.empty()) throw EmptyClassError("no tasks given");
  const double z = normal_quantile(1.0 - delta.value() / 2.0);
  // u = width + standardized gap, packaged for the engine.
  FinitePointwiseBound pb;
  std::vector<double> width(tasks.size());
  pb.theta_def.resize(tasks.size());
  pb.theta_err.assign(tasks.size(), 0.0);
  for (std::size_t h = 0; h < tasks.size(); ++h) {
    const auto& t = tasks[h];
    if (t.def.n != t.err.n) throw std::invalid_argument("u_mean needs equal sample counts");
    if (!(t.def.sigma_hat > 0.0))
      throw std::domain_error("u_mean is undefined for a zero defining standard deviation");
    pb.theta_def[h] =
        std::sqrt(static_cast<double>(t.def.n)) * std::abs(t.def.theta_hat - t.err.theta_hat) /
        t.def.sigma_hat;
    width[h] = t.err.sigma_hat * z / t.def.sigma_hat;
  }
  pb.width = [&width](std::size_t h, ConfidenceLevel) { return width[h]; };
  const FiniteMax best = max_error_bound(pb, delta);
  SimultaneousCIs out{best.xi, best.argmax, {}};
  out.intervals.reserve(tasks.size());
  for (const auto& t : tasks) {
    const double half = t.def.sigma_hat * best.xi / std::sqrt(static_cast<double>(t.def.n));
    out.intervals.push_back({t.def.theta_hat - half, t.def.theta_hat + half});
  }
  return out;
}

double union_bound_adjustment(std::size_t n_tasks, ConfidenceLevel delta, bool two_sided) {
  if (n_tasks < 1) throw std::invalid_argument("union bound needs at least one task");
  const double tail = delta.value() / (static_cast<double>(n_tasks) * (two_sided ? 2.0 : 1.0));
  return normal_quantile(1.0 - tail);
}

void SubgroupSpec::validate() const {
  if (!(M >= 1.0)) throw std::invalid_argument("subgroup M must be >= 1");
  if (!(p_h > 0.0 && p_h <= 1.0 && p_h >= 1.0 / M))
    throw std::invalid_argument("subgroup probability must lie in [1/M, 1]");
}

double subgroup_values(double score, std::span<const double> features, const SubgroupSpec& spec) {
  if (!(spec.p_h > 0.0)) throw std::invalid_argument("subgroup probability must be positive");
  return spec.membership(features) ? score / spec.p_h : 0.0;
}

std::vector<Fig1Row> fig1_experiment(std::span<const double> alphas, std::size_t n_tasks,
                                     std::size_t reps, ConfidenceLevel delta, std::uint64_t seed,
                                     unsigned jobs) {
  if (reps < 1) throw std::invalid_argument("fig1_experiment needs reps >= 1");
  if (n_tasks < 1) throw std::invalid_argument("fig1_experiment needs at least one task");
  for (double a : alphas)
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  const double z = normal_quantile(1.0 - delta.value());
  const double ub = union_bound_adjustment(n_tasks, delta, false);
  auto per_rep = [&](std::size_t rep) {
    Sampler s(make_rng(seed, rep));
    const std::vector<double> points = s.normal_vector(n_tasks);
    const std::vector<double> noise = s.normal_vector(n_tasks);
    const double true_max = *std::max_element(points.begin(), points.end());
    std::vector<Fig1Row> rows;
    std::vector<double> err(n_tasks);
    for (double a : alphas) {
      const double b = std::sqrt(1.0 - a * a);
      for (std::size_t i = 0; i < n_tasks; ++i) err[i] = a * points[i] + b * noise[i];
      const double penalty = kernels::max_diff(points, err).value;
      rows.push_back({a, rep, true_max, z + penalty, ub});
    }
    return rows;
  };
  auto blocks = map_replicates(reps, jobs, per_rep);
  // Reorder to alpha-major: all reps of the first alpha, then the next.
  std::vector<Fig1Row> out;
  out.reserve(reps * alphas.size());
  for (std::size_t k = 0; k < alphas.size(); ++k)
    for (const auto& b : blocks) out.push_back(b[k]);
  return out;
}

std::vector<Fig1Summary> summarize_fig1(std::span<const Fig1Row> rows) {
  struct Acc {
    std::size_t n = 0;
    double s[3] = {0, 0, 0}, ss[3] = {0, 0, 0};
  };
  std::vector<double> order;
  std::map<double, Acc> acc;
  for (const auto& r : rows) {
    if (!acc.count(r.alpha)) order.push_back(r.alpha);
    Acc& a = acc[r.alpha];
    const double v[3] = {r.true_max, r.ee_bound, r.union_bound};
    ++a.n;
    for (int j = 0; j < 3; ++j) {
      a.s[j] += v[j];
      a.ss[j] += v[j] * v[j];
    }
  }
  std::vector<Fig1Summary> out;
  for (double alpha : order) {
    const Acc& a = acc[alpha];
    const double n = static_cast<double>(a.n);
    ColumnSummary c[3];
    for (int j = 0; j < 3; ++j) {
      const double m = a.s[j] / n;
      const double var = a.n > 1 ? std::max(0.0, (a.ss[j] - n * m * m) / (n - 1.0)) : 0.0;
      c[j] = {m, std::sqrt(var)};
    }
    out.push_back({alpha, a.n, c[0], c[1], c[2]});
  }
  return out;
}

std::vector<CoverageRow> means_coverage_experiment(double alpha, std::size_t n_tasks,
                                                   std::size_t n, std::size_t reps,
                                                   ConfidenceLevel delta, std::uint64_t seed,
                                                   unsigned jobs) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::invalid_argument("task correlation must lie in [0, 1) for nondegenerate tasks");
  if (n < 2 || n_tasks < 1 || reps < 1) throw std::invalid_argument("invalid coverage config");
  const double ub = union_bound_adjustment(n_tasks, delta, true);
  const double shared = std::sqrt(alpha), own = std::sqrt(1.0 - alpha);
  auto per_rep = [&](std::size_t rep) {
    Sampler s(make_rng(seed, rep));
    std::vector<TaskPair> tasks(n_tasks);
    std::vector<std::vector<double>> ys(n_tasks, std::vector<double>(n));
    for (int part = 0; part < 2; ++part) {
      for (std::size_t i = 0; i < n; ++i) {
        const double common = s.normal();
        for (std::size_t h = 0; h < n_tasks; ++h) ys[h][i] = shared * common + own * s.normal();
      }
      for (std::size_t h = 0; h < n_tasks; ++h)
        (part == 0 ? tasks[h].def : tasks[h].err) = mean_stats(ys[h]);
    }
    const SimultaneousCIs ci = simultaneous_cis(tasks, delta);
    bool covered = true;
    double max_err = -std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < n_tasks; ++h) {
      covered = covered && ci.intervals[h].lo <= 0.0 && 0.0 <= ci.intervals[h].hi;
      const auto& d = tasks[h].def;
      max_err = std::max(max_err, std::sqrt(static_cast<double>(n)) * std::abs(d.theta_hat) /
                                      d.sigma_hat);
    }
    return CoverageRow{alpha, rep, ci.xi, max_err, covered, ub};
  };
  return map_replicates(reps, jobs, per_rep);
}

}  // namespace ee::means
