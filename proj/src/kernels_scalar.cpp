#include "ee/kernels.hpp"

#include <algorithm>

namespace ee::kernels {
namespace {

// Canonical reduction order shared with the AVX2 path: four lane accumulators
// over full blocks, a sequential tail, then ((l0 + l1) + (l2 + l3)) + tail.
struct Lanes {
  double l[4] = {0.0, 0.0, 0.0, 0.0};
  double tail = 0.0;
  double total() const { return ((l[0] + l[1]) + (l[2] + l[3])) + tail; }
};

ArgMax scalar_masked_max_affine(std::span<const double> width, std::span<const double> plus,
                                std::span<const double> minus,
                                std::span<const std::uint8_t> mask) {
  ArgMax best;
  const bool masked = !mask.empty();
  for (std::size_t i = 0; i < width.size(); ++i) {
    if (masked && mask[i] == 0) continue;
    const double u = (width[i] + plus[i]) - minus[i];
    if (u > best.value) {
      best.value = u;
      best.index = i;
    }
  }
  return best;
}

ArgMax scalar_max_diff(std::span<const double> a, std::span<const double> b) {
  ArgMax best;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double u = a[i] - b[i];
    if (u > best.value) {
      best.value = u;
      best.index = i;
    }
  }
  return best;
}

double scalar_sum(std::span<const double> x) {
  Lanes acc;
  const std::size_t n = x.size(), body = n - n % 4;
  for (std::size_t i = 0; i < body; i += 4)
    for (int l = 0; l < 4; ++l) acc.l[l] += x[i + l];
  for (std::size_t i = body; i < n; ++i) acc.tail += x[i];
  return acc.total();
}

double scalar_sum_sq_dev(std::span<const double> x, double center) {
  Lanes acc;
  const std::size_t n = x.size(), body = n - n % 4;
  for (std::size_t i = 0; i < body; i += 4)
    for (int l = 0; l < 4; ++l) {
      const double d = x[i + l] - center;
      acc.l[l] += d * d;
    }
  for (std::size_t i = body; i < n; ++i) {
    const double d = x[i] - center;
    acc.tail += d * d;
  }
  return acc.total();
}

double scalar_dot(std::span<const double> a, std::span<const double> b) {
  Lanes acc;
  const std::size_t n = a.size(), body = n - n % 4;
  for (std::size_t i = 0; i < body; i += 4)
    for (int l = 0; l < 4; ++l) acc.l[l] += a[i + l] * b[i + l];
  for (std::size_t i = body; i < n; ++i) acc.tail += a[i] * b[i];
  return acc.total();
}

double row_loss(ColumnMajorView x, std::span<const double> y, std::span<const double> beta,
                double clip, std::size_t i) {
  double p = 0.0;
  for (std::size_t j = 0; j < x.cols; ++j) p += x.column(j)[i] * beta[j];
  p = std::min(std::max(p, -clip), clip);
  const double r = p - y[i];
  return r * r;
}

double scalar_clipped_sq_loss_sum(ColumnMajorView x, std::span<const double> y,
                                  std::span<const double> beta, double clip) {
  Lanes acc;
  const std::size_t n = x.rows, body = n - n % 4;
  for (std::size_t i = 0; i < body; i += 4)
    for (int l = 0; l < 4; ++l) acc.l[l] += row_loss(x, y, beta, clip, i + l);
  for (std::size_t i = body; i < n; ++i) acc.tail += row_loss(x, y, beta, clip, i);
  return acc.total();
}

}  // namespace

const Table& scalar_table() {
  static const Table t{scalar_masked_max_affine, scalar_max_diff,  scalar_sum,
                       scalar_sum_sq_dev,        scalar_dot,       scalar_clipped_sq_loss_sum};
  return t;
}

}  // namespace ee::kernels
