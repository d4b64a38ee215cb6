#pragma once
// Single-error high-probability widths and the standard normal quantile.

#include <cstddef>

namespace ee {

// Confidence parameter delta, strictly inside (0, 1).
class ConfidenceLevel {
 public:
  explicit ConfidenceLevel(double delta);
  double value() const { return delta_; }
  ConfidenceLevel scaled(double factor) const { return ConfidenceLevel(delta_ * factor); }

 private:
  double delta_;
};

enum class WidthKind { normal_quantile, hoeffding, freedman_ips };

struct Width {
  double value;
  WidthKind kind;
};

// Standard normal CDF via std::erfc.
double normal_cdf(double x);

// Inverse of the standard normal CDF, absolute accuracy well below 1e-8.
// Throws std::domain_error for p outside (0, 1).
double normal_quantile(double p);

// 2 M sqrt(ln(1/delta) / (2 n)): deviation of an average of differences of two
// [0, M]-valued losses.
Width hoeffding_excess_width(double loss_range, std::size_t n, ConfidenceLevel delta);

// sqrt(ln(1/delta) / n) (sqrt(cover_a) + sqrt(cover_b)): importance-weighted
// policy-difference width. Covers below 1 are rejected.
Width freedman_ips_width(ConfidenceLevel delta, std::size_t n, double cover_a, double cover_b);

}  // namespace ee
