#include "ee/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cstring>

#define EE_AVX2 __attribute__((target("avx2")))

namespace ee::kernels {
namespace {

EE_AVX2 inline double reduce_lanes(__m256d v, double tail) {
  alignas(32) double l[4];
  _mm256_store_pd(l, v);
  return ((l[0] + l[1]) + (l[2] + l[3])) + tail;
}

EE_AVX2 inline ArgMax reduce_argmax(__m256d best, __m256d idx) {
  alignas(32) double v[4], ix[4];
  _mm256_store_pd(v, best);
  _mm256_store_pd(ix, idx);
  ArgMax out;
  for (int l = 0; l < 4; ++l) {
    if (ix[l] < 0.0) continue;
    const auto i = static_cast<std::size_t>(ix[l]);
    if (v[l] > out.value || (v[l] == out.value && i < out.index)) {
      out.value = v[l];
      out.index = i;
    }
  }
  return out;
}

EE_AVX2 ArgMax avx2_masked_max_affine(std::span<const double> width, std::span<const double> plus,
                                      std::span<const double> minus,
                                      std::span<const std::uint8_t> mask) {
  const std::size_t n = width.size(), body = n - n % 4;
  const bool masked = !mask.empty();
  __m256d best = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  __m256d best_idx = _mm256_set1_pd(-1.0);
  __m256d idx = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  const __m256d step = _mm256_set1_pd(4.0);
  for (std::size_t i = 0; i < body; i += 4) {
    __m256d u = _mm256_sub_pd(_mm256_add_pd(_mm256_loadu_pd(width.data() + i),
                                            _mm256_loadu_pd(plus.data() + i)),
                              _mm256_loadu_pd(minus.data() + i));
    __m256d gt = _mm256_cmp_pd(u, best, _CMP_GT_OQ);
    if (masked) {
      int packed;
      std::memcpy(&packed, mask.data() + i, 4);
      const __m256i m64 = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(packed));
      const __m256i off = _mm256_cmpeq_epi64(m64, _mm256_setzero_si256());
      gt = _mm256_andnot_pd(_mm256_castsi256_pd(off), gt);
    }
    best = _mm256_blendv_pd(best, u, gt);
    best_idx = _mm256_blendv_pd(best_idx, idx, gt);
    idx = _mm256_add_pd(idx, step);
  }
  ArgMax out = reduce_argmax(best, best_idx);
  for (std::size_t i = body; i < n; ++i) {
    if (masked && mask[i] == 0) continue;
    const double u = (width[i] + plus[i]) - minus[i];
    if (u > out.value) {
      out.value = u;
      out.index = i;
    }
  }
  return out;
}

EE_AVX2 ArgMax avx2_max_diff(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size(), body = n - n % 4;
  __m256d best = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  __m256d best_idx = _mm256_set1_pd(-1.0);
  __m256d idx = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  const __m256d step = _mm256_set1_pd(4.0);
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d u = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
    const __m256d gt = _mm256_cmp_pd(u, best, _CMP_GT_OQ);
    best = _mm256_blendv_pd(best, u, gt);
    best_idx = _mm256_blendv_pd(best_idx, idx, gt);
    idx = _mm256_add_pd(idx, step);
  }
  ArgMax out = reduce_argmax(best, best_idx);
  for (std::size_t i = body; i < n; ++i) {
    const double u = a[i] - b[i];
    if (u > out.value) {
      out.value = u;
      out.index = i;
    }
  }
  return out;
}

EE_AVX2 double avx2_sum(std::span<const double> x) {
  const std::size_t n = x.size(), body = n - n % 4;
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < body; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x.data() + i));
  double tail = 0.0;
  for (std::size_t i = body; i < n; ++i) tail += x[i];
  return reduce_lanes(acc, tail);
}

EE_AVX2 double avx2_sum_sq_dev(std::span<const double> x, double center) {
  const std::size_t n = x.size(), body = n - n % 4;
  const __m256d c = _mm256_set1_pd(center);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x.data() + i), c);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double tail = 0.0;
  for (std::size_t i = body; i < n; ++i) {
    const double d = x[i] - center;
    tail += d * d;
  }
  return reduce_lanes(acc, tail);
}

EE_AVX2 double avx2_dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size(), body = n - n % 4;
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < body; i += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a.data() + i),
                                           _mm256_loadu_pd(b.data() + i)));
  double tail = 0.0;
  for (std::size_t i = body; i < n; ++i) tail += a[i] * b[i];
  return reduce_lanes(acc, tail);
}

EE_AVX2 double avx2_clipped_sq_loss_sum(ColumnMajorView x, std::span<const double> y,
                                        std::span<const double> beta, double clip) {
  const std::size_t n = x.rows, body = n - n % 4;
  const __m256d hi = _mm256_set1_pd(clip), lo = _mm256_set1_pd(-clip);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < body; i += 4) {
    __m256d p = _mm256_setzero_pd();
    for (std::size_t j = 0; j < x.cols; ++j)
      p = _mm256_add_pd(p, _mm256_mul_pd(_mm256_loadu_pd(x.column(j) + i),
                                         _mm256_set1_pd(beta[j])));
    p = _mm256_min_pd(_mm256_max_pd(p, lo), hi);
    const __m256d r = _mm256_sub_pd(p, _mm256_loadu_pd(y.data() + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(r, r));
  }
  double tail = 0.0;
  for (std::size_t i = body; i < n; ++i) {
    double p = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) p += x.column(j)[i] * beta[j];
    p = std::min(std::max(p, -clip), clip);
    const double r = p - y[i];
    tail += r * r;
  }
  return reduce_lanes(acc, tail);
}

}  // namespace

const Table& avx2_table() {
  static const Table t{avx2_masked_max_affine, avx2_max_diff, avx2_sum,
                       avx2_sum_sq_dev,        avx2_dot,      avx2_clipped_sq_loss_sum};
  return t;
}

}  // namespace ee::kernels
