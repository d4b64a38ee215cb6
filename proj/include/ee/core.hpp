#pragma once
// Error-estimation engine: per-task bounds u(h), their maximum over a class,
// and the localization iteration that shrinks the class with a lower bound c.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ee/concentration.hpp"
#include "ee/random.hpp"
#include "ee/solver.hpp"

namespace ee {

struct EmptyClassError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// The localized class lost every member: the lower bound c is inconsistent
// with the observed estimates.
struct EmptyLocalizedClassError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- splits

enum class SplitOrdering { sequential, shuffled };

struct SplitSpec {
  double err_fraction = 0.5;  // share of the sample given to the error part
  SplitOrdering ordering = SplitOrdering::sequential;
  std::uint64_t seed = 0;  // used by the shuffled ordering
};

template <class T>
struct SplitData {
  std::vector<T> def_part;
  std::vector<T> err_part;
  std::vector<std::size_t> def_index;  // positions in the source sample
  std::vector<std::size_t> err_index;
  SplitSpec spec;
};

// Defining part gets the first floor((1 - err_fraction) n) items of the
// (optionally shuffled) sample; the rest form the error part, which must be
// nonempty.
template <class T>
SplitData<T> split_sample(std::span<const T> sample, SplitSpec spec) {
  if (!(spec.err_fraction > 0.0 && spec.err_fraction <= 1.0))
    throw std::invalid_argument("err_fraction must lie in (0, 1]");
  const std::size_t n = sample.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (spec.ordering == SplitOrdering::shuffled) {
    Rng rng = make_rng(spec.seed, 0, 0x5e1f);
    std::shuffle(order.begin(), order.end(), rng);
  }
  const auto n_def = static_cast<std::size_t>(
      std::floor((1.0 - spec.err_fraction) * static_cast<double>(n) + 1e-9));
  if (n_def >= n) throw std::invalid_argument("error part of the split is empty");
  if (n_def == 0) throw std::invalid_argument("defining part of the split is empty");
  SplitData<T> out;
  out.spec = spec;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_def) {
      out.def_part.push_back(sample[order[i]]);
      out.def_index.push_back(order[i]);
    } else {
      out.err_part.push_back(sample[order[i]]);
      out.err_index.push_back(order[i]);
    }
  }
  return out;
}

// ---------------------------------------------------------------- pointwise bounds

// Sign convention of the per-task error.
//  estimate_minus_target: e_h = est_h - target_h, u = b + est_h - est_err_h
//  target_minus_estimate: e_h = target_h - est_h, u = b + est_err_h - est_h
// Localization relies on target_minus_estimate (its lower bound c bounds the
// largest target from below).
enum class ErrorOrientation { estimate_minus_target, target_minus_estimate };

inline double combine_u(ErrorOrientation o, double width, double theta_def, double theta_err) {
  return o == ErrorOrientation::estimate_minus_target ? width + theta_def - theta_err
                                                      : width + theta_err - theta_def;
}

// Finite class with handles 0..size()-1.
struct FinitePointwiseBound {
  std::vector<double> theta_def;
  std::vector<double> theta_err;
  std::function<double(std::size_t, ConfidenceLevel)> width;
  ErrorOrientation orientation = ErrorOrientation::estimate_minus_target;

  std::size_t size() const { return theta_def.size(); }
  std::vector<double> widths(ConfidenceLevel delta) const;
  static std::function<double(std::size_t, ConfidenceLevel)> constant_width(double b);
};

// Class indexed by points of a box.
struct ParametricPointwiseBound {
  std::function<double(std::span<const double>)> theta_def;
  std::function<double(std::span<const double>)> theta_err;
  std::function<double(std::span<const double>, ConfidenceLevel)> width;
  ErrorOrientation orientation = ErrorOrientation::estimate_minus_target;
};

double pointwise_u(const FinitePointwiseBound& pb, std::size_t h, ConfidenceLevel delta);
double pointwise_u(const ParametricPointwiseBound& pb, const Box& domain,
                   std::span<const double> h, ConfidenceLevel delta);

// ---------------------------------------------------------------- uniform bound

struct FiniteMax {
  double xi;
  std::size_t argmax;
};

FiniteMax max_error_bound(const FinitePointwiseBound& pb, ConfidenceLevel delta);

struct ParametricMax {
  double xi;
  std::vector<double> argmax;
  SolverDiagnostics diagnostics;
};

ParametricMax max_error_bound(const Box& domain, const ParametricPointwiseBound& pb,
                              ConfidenceLevel delta, const SolverConfig& cfg);

// ---------------------------------------------------------------- localization

enum class StopReason { non_decreasing, tolerance, max_iterations };
std::string to_string(StopReason r);

struct LocalizationConfig {
  double tolerance = 1e-6;
  std::size_t max_iterations = 50;
};

// H_0 is the full class; for k >= 1, H_k = {h in H_{k-1} : -theta_def(h) <= thresholds[k]}
// with thresholds[k] = xi_sequence[k-1] - c. xi_sequence is the running
// minimum of the raw per-step maxima, which are kept in raw_xi.
struct LocalizationTrace {
  std::vector<double> xi_sequence;
  std::vector<double> raw_xi;
  std::vector<double> thresholds;  // thresholds[0] = +inf (no constraint)
  StopReason stop_reason = StopReason::max_iterations;
  double lower_bound_c = 0.0;

  double xi() const { return xi_sequence.back(); }
  std::size_t iterations() const { return xi_sequence.size() - 1; }
  // Membership of a handle with defining estimate theta_def in H_k.
  bool contains(std::size_t k, double theta_def) const;
};

struct FiniteLocalization {
  LocalizationTrace trace;
  std::vector<std::vector<std::uint8_t>> members;  // membership mask of H_k
  std::vector<std::size_t> argmax;                 // per-step maximizer
};

FiniteLocalization localize(const FinitePointwiseBound& pb, double c, ConfidenceLevel delta,
                            const LocalizationConfig& cfg = {});

struct ParametricLocalization {
  LocalizationTrace trace;
  std::vector<std::vector<double>> argmax;
  std::vector<SolverDiagnostics> diagnostics;
};

ParametricLocalization localize(const Box& domain, const ParametricPointwiseBound& pb, double c,
                                ConfidenceLevel delta, const LocalizationConfig& cfg,
                                const SolverConfig& solver);

}  // namespace ee
