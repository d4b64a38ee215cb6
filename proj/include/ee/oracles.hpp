#pragma once
// Brute-force reference computations used to validate the fast paths.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ee::oracles {

inline constexpr std::size_t kMaxRademacherColumns = 20;

// Rows are functions, columns are sample points; every |entry| <= bound.
struct FunctionTable {
  std::vector<std::vector<double>> values;
  double bound = 1.0;

  std::size_t rows() const { return values.size(); }
  std::size_t cols() const { return values.empty() ? 0 : values.front().size(); }
  void validate() const;
};

// E_eps sup_f |(1/n) sum_i eps_i f(x_i)| by enumerating all 2^n sign vectors.
double exact_rademacher(const FunctionTable& t);

// Expectation of exact_rademacher over n i.i.d. draws from a discrete law:
// domain.values[f][j] is f at support point j, probs[j] its probability.
// Exact: sums over all count vectors with multinomial weights.
double population_rademacher(const FunctionTable& domain, std::span<const double> probs,
                             std::size_t n);

// Standard normal CDF from the all-positive erf Taylor series in long double.
long double series_normal_cdf(long double x);

// Bisection of series_normal_cdf on [-10, 10] down to interval width 1e-12.
double quantile_oracle(double p);

struct MaxError {
  double value;
  std::size_t index;
};

// Linear scan; the lowest index wins ties.
MaxError brute_max_error(std::span<const double> errors);

}  // namespace ee::oracles
