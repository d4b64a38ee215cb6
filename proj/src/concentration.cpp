#include "ee/concentration.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ee {

ConfidenceLevel::ConfidenceLevel(double delta) : delta_(delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::domain_error("confidence level must lie in (0, 1), got " + std::to_string(delta));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

// Acklam's rational approximation of the lower-tail quantile, relative error
// about 1.15e-9 before refinement.
double acklam(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// p <= 0.5, so Phi is evaluated in its accurate lower tail.
double lower_quantile(double p) {
  double x = acklam(p);
  // One Halley step on Phi(x) - p.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("normal_quantile requires p in (0, 1), got " + std::to_string(p));
  if (p > 0.5) return -lower_quantile(1.0 - p);
  return lower_quantile(p);
}

Width hoeffding_excess_width(double loss_range, std::size_t n, ConfidenceLevel delta) {
  if (!(loss_range >= 0.0)) throw std::invalid_argument("loss range must be nonnegative");
  if (n < 1) throw std::invalid_argument("hoeffding width needs n >= 1");
  const double v =
      2.0 * loss_range * std::sqrt(std::log(1.0 / delta.value()) / (2.0 * static_cast<double>(n)));
  return {v, WidthKind::hoeffding};
}

Width freedman_ips_width(ConfidenceLevel delta, std::size_t n, double cover_a, double cover_b) {
  if (n < 1) throw std::invalid_argument("freedman width needs n >= 1");
  if (!(cover_a >= 1.0) || !(cover_b >= 1.0))
    throw std::invalid_argument("covers must be >= 1 for a valid kernel");
  const double v = std::sqrt(std::log(1.0 / delta.value()) / static_cast<double>(n)) *
                   (std::sqrt(cover_a) + std::sqrt(cover_b));
  return {v, WidthKind::freedman_ips};
}

}  // namespace ee
