#pragma once
// Multiple testing with a weighted maximum error, and bounds combined over
// several split directions (two-way switching, min over m resplits).

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <ranges>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ee/concentration.hpp"
#include "ee/means.hpp"

namespace ee::inference {

// Screening indicator iota and positive weights b, both built from the
// defining part only.
struct WeightPair {
  std::vector<std::uint8_t> iota;
  std::vector<double> b;

  void validate(std::size_t n_tasks) const;
};

// Indicator 1(theta > sd z_{1-delta} / sqrt(n)); weight sd * min(1, 1/|theta|).
WeightPair default_weights(std::span<const means::MeanTaskStats> def_stats, ConfidenceLevel delta);
WeightPair unit_weights(std::size_t n_tasks);

struct RejectResult {
  std::optional<double> xi_w;          // empty when no task passes the screen
  std::vector<std::size_t> rejected;   // ascending task indices
};

// xi_w = max over screened tasks of b(h) u(h); task h is rejected when it is
// screened and theta_def(h) > (sd_def(h) / sqrt(n)) xi_w / b(h), strictly.
RejectResult reject_set(std::span<const means::TaskPair> tasks, const WeightPair& weights,
                        ConfidenceLevel delta);

// ---------------------------------------------------------------- cross-fitting

struct SwitchedBound {
  double xi_12;  // first fold defines, second fold estimates the error
  double xi_21;
  double xi_min;
};

// builder(def_fold, err_fold, delta) -> bound. Both directions run at delta / 2.
template <class Fold, class Builder>
SwitchedBound switched_bound(const Fold& fold1, const Fold& fold2, Builder&& builder,
                             ConfidenceLevel delta) {
  if (std::ranges::empty(fold1) || std::ranges::empty(fold2))
    throw std::invalid_argument("switched_bound needs two nonempty folds");
  const ConfidenceLevel half = delta.scaled(0.5);
  const double a = builder(fold1, fold2, half);
  const double b = builder(fold2, fold1, half);
  return {a, b, std::min(a, b)};
}

// Minimum of m bounds, the i-th produced by builder(i, delta / m).
template <class Builder>
double kfold_bound(std::size_t m, Builder&& builder, ConfidenceLevel delta) {
  if (m < 1) throw std::invalid_argument("kfold_bound needs m >= 1");
  const ConfidenceLevel each = delta.scaled(1.0 / static_cast<double>(m));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) best = std::min(best, static_cast<double>(builder(i, each)));
  return best;
}

// ---------------------------------------------------------------- experiments

// Finite Gaussian class with known targets 0. Within a split, task estimates
// are sqrt(alpha) Z_0 + sqrt(1 - alpha) Z_h; the two splits are independent.
// u(h) = z_{1-delta} + est_def(h) - est_err(h); the error of task h is est_def(h).
struct FiniteCoverageRow {
  double alpha;
  std::size_t rep;
  double xi;
  double true_max;
  bool covered;
};

std::vector<FiniteCoverageRow> finite_coverage_experiment(double alpha, std::size_t n_tasks,
                                                          std::size_t reps, ConfidenceLevel delta,
                                                          std::uint64_t seed, unsigned jobs = 0);

// Same class, bound computed in both split directions.
struct CrossfitRow {
  double alpha;
  std::size_t rep;
  double xi_12;        // at delta / 2
  double xi_21;        // at delta / 2
  double xi_min;
  double xi_single;    // first direction alone at delta
  double true_max;     // max error of the direction attaining xi_min
  bool covered;        // xi_min >= true_max
};

std::vector<CrossfitRow> crossfit_experiment(double alpha, std::size_t n_tasks, std::size_t reps,
                                             ConfidenceLevel delta, std::uint64_t seed,
                                             unsigned jobs = 0);

enum class WeightChoice { unit, screened };
std::string to_string(WeightChoice w);

// Global null: every task mean is 0, independent N(0, 1) samples of size n
// per split. Any rejection is a family-wise error.
struct MultitestRow {
  WeightChoice weights;
  std::size_t rep;
  bool fwer;              // at least one rejection
  std::size_t n_rejected;
  std::size_t n_screened;
  double xi_w;            // NaN when nothing is screened
  bool rescale_invariant; // b scaled by 4 scales xi_w by 4 and keeps the rejection set
};

std::vector<MultitestRow> multitest_experiment(WeightChoice weights, std::size_t n_tasks,
                                               std::size_t n, std::size_t reps,
                                               ConfidenceLevel delta, std::uint64_t seed,
                                               unsigned jobs = 0);

}  // namespace ee::inference
