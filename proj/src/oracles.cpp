#include "ee/oracles.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace ee::oracles {

void FunctionTable::validate() const {
  if (values.empty() || values.front().empty())
    throw std::invalid_argument("function table needs at least one row and one column");
  const std::size_t n = values.front().size();
  for (const auto& row : values) {
    if (row.size() != n) throw std::invalid_argument("ragged function table");
    for (double v : row)
      if (!(std::abs(v) <= bound)) throw std::invalid_argument("table entry exceeds the bound");
  }
}

double exact_rademacher(const FunctionTable& t) {
  t.validate();
  const std::size_t n = t.cols();
  if (n > kMaxRademacherColumns)
    throw std::invalid_argument("exact_rademacher enumerates 2^n sign vectors; n = " +
                                std::to_string(n) + " exceeds 20");
  // eps and -eps give the same absolute value, so fix eps_0 = +1.
  const std::size_t half = std::size_t{1} << (n - 1);
  long double total = 0.0L;
  for (std::size_t mask = 0; mask < half; ++mask) {
    long double best = 0.0L;
    for (const auto& row : t.values) {
      long double s = row[0];
      for (std::size_t i = 1; i < n; ++i) s += ((mask >> (i - 1)) & 1u) ? -row[i] : row[i];
      best = std::max(best, std::fabs(s));
    }
    total += best;
  }
  return static_cast<double>(total / static_cast<long double>(half) / static_cast<long double>(n));
}

double population_rademacher(const FunctionTable& domain, std::span<const double> probs,
                             std::size_t n) {
  domain.validate();
  const std::size_t m = domain.cols();
  if (probs.size() != m) throw std::invalid_argument("one probability per support point");
  if (n == 0 || n > kMaxRademacherColumns) throw std::invalid_argument("n must lie in [1, 20]");
  std::vector<std::size_t> counts(m, 0);
  long double total = 0.0L;
  // Enumerate count vectors summing to n, recursively.
  auto recurse = [&](auto&& self, std::size_t j, std::size_t left) -> void {
    if (j + 1 == m) {
      counts[j] = left;
      long double logw = std::lgamma(static_cast<long double>(n) + 1.0L);
      for (std::size_t k = 0; k < m; ++k) {
        logw -= std::lgamma(static_cast<long double>(counts[k]) + 1.0L);
        if (counts[k] > 0) {
          if (probs[k] <= 0.0) return;
          logw += static_cast<long double>(counts[k]) * std::log(static_cast<long double>(probs[k]));
        }
      }
      FunctionTable sample;
      sample.bound = domain.bound;
      for (const auto& row : domain.values) {
        std::vector<double> r;
        r.reserve(n);
        for (std::size_t k = 0; k < m; ++k) r.insert(r.end(), counts[k], row[k]);
        sample.values.push_back(std::move(r));
      }
      total += std::exp(logw) * static_cast<long double>(exact_rademacher(sample));
      return;
    }
    for (std::size_t c = 0; c <= left; ++c) {
      counts[j] = c;
      self(self, j + 1, left - c);
    }
  };
  recurse(recurse, 0, n);
  return static_cast<double>(total);
}

namespace {

// erf(x) = 2/sqrt(pi) e^{-x^2} sum_k 2^k x^{2k+1} / (1*3*...*(2k+1)), x >= 0.
long double erf_series(long double x) {
  const long double x2 = x * x;
  long double term = x, sum = x;
  for (int k = 1; k < 2000; ++k) {
    term *= 2.0L * x2 / static_cast<long double>(2 * k + 1);
    sum += term;
    if (term < sum * 1e-21L) break;
  }
  return 2.0L / std::sqrt(std::numbers::pi_v<long double>) * std::exp(-x2) * sum;
}

}  // namespace

long double series_normal_cdf(long double x) {
  const long double t = std::fabs(x) / std::sqrt(2.0L);
  const long double e = erf_series(t);
  return x >= 0 ? 0.5L * (1.0L + e) : 0.5L * (1.0L - e);
}

double quantile_oracle(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("quantile_oracle requires p in (0, 1), got " + std::to_string(p));
  long double lo = -10.0L, hi = 10.0L;
  const long double target = p;
  while (hi - lo > 1e-12L) {
    const long double mid = 0.5L * (lo + hi);
    if (series_normal_cdf(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

MaxError brute_max_error(std::span<const double> errors) {
  if (errors.empty()) throw std::invalid_argument("brute_max_error needs a nonempty list");
  MaxError best{errors[0], 0};
  for (std::size_t i = 1; i < errors.size(); ++i)
    if (errors[i] > best.value) best = {errors[i], i};
  return best;
}

}  // namespace ee::oracles
