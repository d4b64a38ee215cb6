#pragma once
// Simultaneous confidence intervals for many means, the union-bound baseline,
// subgroup transforms, and the correlated-Gaussian maximum experiment.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "ee/concentration.hpp"

namespace ee::means {

struct MeanTaskStats {
  double theta_hat;
  double sigma_hat;  // n - 1 denominator
  std::size_t n;
};

MeanTaskStats mean_stats(std::span<const double> sample);

struct TaskPair {
  MeanTaskStats def;
  MeanTaskStats err;
};

// sqrt(n) |def - err| / sd_def + sd_err z / sd_def with z = Phi^{-1}(1 - delta/2).
double u_mean(const MeanTaskStats& def, const MeanTaskStats& err, ConfidenceLevel delta);

struct Interval {
  double lo;
  double hi;
};

struct SimultaneousCIs {
  double xi;
  std::size_t argmax;
  std::vector<Interval> intervals;  // theta_def +- sd_def xi / sqrt(n)
};

SimultaneousCIs simultaneous_cis(std::span<const TaskPair> tasks, ConfidenceLevel delta);

// One-sided: Phi^{-1}(1 - delta/n). Two-sided: Phi^{-1}(1 - delta/(2n)).
double union_bound_adjustment(std::size_t n_tasks, ConfidenceLevel delta, bool two_sided);

struct SubgroupSpec {
  std::function<bool(std::span<const double>)> membership;
  double p_h;  // known membership probability, at least 1/M
  double M;

  void validate() const;
};

// T 1(X in h) / p_h.
double subgroup_values(double score, std::span<const double> features, const SubgroupSpec& spec);

// ------------------------------------------------------------ experiments

struct Fig1Row {
  double alpha;
  std::size_t rep;
  double true_max;
  double ee_bound;
  double union_bound;
};

// Per rep: defining errors ~ N(0, I_n); error-split errors =
// alpha * defining + sqrt(1 - alpha^2) * independent N(0, I_n).
// Replicate r uses the same stream for every alpha.
std::vector<Fig1Row> fig1_experiment(std::span<const double> alphas, std::size_t n_tasks,
                                     std::size_t reps, ConfidenceLevel delta, std::uint64_t seed,
                                     unsigned jobs = 0);

struct ColumnSummary {
  double mean;
  double sd;
};

struct Fig1Summary {
  double alpha;
  std::size_t reps;
  ColumnSummary true_max, ee_bound, union_bound;
};

std::vector<Fig1Summary> summarize_fig1(std::span<const Fig1Row> rows);

struct CoverageRow {
  double alpha;
  std::size_t rep;
  double xi;
  double max_error;     // largest standardized error sqrt(n) |mean - truth| / sd over tasks
  bool covered;         // every interval contains its true mean
  double union_bound;   // two-sided union-bound multiplier, for comparison
};

// Joint coverage of the simultaneous intervals. Tasks have true mean 0 and
// equicorrelated Gaussian samples, corr(Y_h, Y_h') = alpha, independent splits
// of n samples each.
std::vector<CoverageRow> means_coverage_experiment(double alpha, std::size_t n_tasks,
                                                   std::size_t n, std::size_t reps,
                                                   ConfidenceLevel delta, std::uint64_t seed,
                                                   unsigned jobs = 0);

}  // namespace ee::means
