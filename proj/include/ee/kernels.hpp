#pragma once
// Vector kernels behind the finite-class maxima and the empirical loss sums.
// Every kernel has a scalar reference and an AVX2 variant; both use the same
// four-lane accumulation order so their results are bit-identical.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

namespace ee::kernels {

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

struct ArgMax {
  double value = -std::numeric_limits<double>::infinity();
  std::size_t index = npos;  // npos when no element was eligible
};

// Column-major feature block: column j holds feature j of every row.
struct ColumnMajorView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  const double* column(std::size_t j) const { return data + j * rows; }
};

enum class Isa { scalar, avx2 };

struct Table {
  // max over i with mask[i] != 0 (empty mask = all) of width[i] + plus[i] - minus[i]
  ArgMax (*masked_max_affine)(std::span<const double> width, std::span<const double> plus,
                              std::span<const double> minus, std::span<const std::uint8_t> mask);
  // max over i of a[i] - b[i]
  ArgMax (*max_diff)(std::span<const double> a, std::span<const double> b);
  double (*sum)(std::span<const double> x);
  double (*sum_sq_dev)(std::span<const double> x, double center);
  double (*dot)(std::span<const double> a, std::span<const double> b);
  // sum_i (clamp(x_i . beta, -clip, clip) - y_i)^2
  double (*clipped_sq_loss_sum)(ColumnMajorView x, std::span<const double> y,
                                std::span<const double> beta, double clip);
};

const Table& scalar_table();
const Table& avx2_table();
bool cpu_has_avx2();

// Table chosen once per process: AVX2 when the CPU supports it, unless the
// environment variable EE_FORCE_SCALAR is set to a non-empty value other than 0.
const Table& active();
Isa active_isa();

inline ArgMax masked_max_affine(std::span<const double> width, std::span<const double> plus,
                                std::span<const double> minus,
                                std::span<const std::uint8_t> mask = {}) {
  return active().masked_max_affine(width, plus, minus, mask);
}
inline ArgMax max_diff(std::span<const double> a, std::span<const double> b) {
  return active().max_diff(a, b);
}
inline double sum(std::span<const double> x) { return active().sum(x); }
inline double sum_sq_dev(std::span<const double> x, double center) {
  return active().sum_sq_dev(x, center);
}
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a, b);
}
inline double clipped_sq_loss_sum(ColumnMajorView x, std::span<const double> y,
                                  std::span<const double> beta, double clip) {
  return active().clipped_sq_loss_sum(x, y, beta, clip);
}

}  // namespace ee::kernels
