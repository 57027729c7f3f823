// Compiled with -mavx2 only; callers reach it through the dispatch table after
// a CPUID check.

#include <immintrin.h>

#include <cmath>

#include "cnkz/kernels.hpp"
#include "kernels_impl.hpp"

namespace cnkz::kernels {
namespace {

// Lane sum in the scalar reference order: (l0 + l1) + (l2 + l3).
inline double hsum_ordered(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double s = hsum_ordered(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares_avx2(const double* a, std::size_t n) { return dot_avx2(a, a, n); }

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

inline __m256d wrapped(__m256d d, __m256d period) {
  // period 0 lanes: d / 0 is +-inf or nan, masked out by the blend below.
  const __m256d zero = _mm256_setzero_pd();
  const __m256d turns =
      _mm256_round_pd(_mm256_div_pd(d, period), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const __m256d w = _mm256_sub_pd(d, _mm256_mul_pd(period, turns));
  const __m256d has_period = _mm256_cmp_pd(period, zero, _CMP_GT_OQ);
  return _mm256_blendv_pd(d, w, has_period);
}

void weighted_sq_dist_avx2(const double* points, std::size_t count, std::size_t dim,
                           const double* query, const double* weight, const double* period,
                           double* out) {
  for (std::size_t p = 0; p < count; ++p) {
    const double* row = points + p * dim;
    __m256d acc = _mm256_setzero_pd();
    std::size_t d = 0;
    for (; d + 4 <= dim; d += 4) {
      const __m256d diff = wrapped(
          _mm256_sub_pd(_mm256_loadu_pd(row + d), _mm256_loadu_pd(query + d)),
          _mm256_loadu_pd(period + d));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(weight + d),
                                             _mm256_mul_pd(diff, diff)));
    }
    double s = hsum_ordered(acc);
    for (; d < dim; ++d) {
      double diff = row[d] - query[d];
      if (period[d] > 0.0) diff = diff - period[d] * std::nearbyint(diff / period[d]);
      s += weight[d] * (diff * diff);
    }
    out[p] = s;
  }
}

std::size_t aabb_overlaps_avx2(const BoxSoA& boxes, const double lo[3], const double hi[3],
                               std::uint8_t* mask) {
  const __m256d qlx = _mm256_set1_pd(lo[0]), qly = _mm256_set1_pd(lo[1]),
                qlz = _mm256_set1_pd(lo[2]);
  const __m256d qhx = _mm256_set1_pd(hi[0]), qhy = _mm256_set1_pd(hi[1]),
                qhz = _mm256_set1_pd(hi[2]);
  const std::size_t n = boxes.size();
  std::size_t hits = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d m = _mm256_cmp_pd(_mm256_loadu_pd(&boxes.lo_x[i]), qhx, _CMP_LE_OQ);
    m = _mm256_and_pd(m, _mm256_cmp_pd(_mm256_loadu_pd(&boxes.hi_x[i]), qlx, _CMP_GE_OQ));
    m = _mm256_and_pd(m, _mm256_cmp_pd(_mm256_loadu_pd(&boxes.lo_y[i]), qhy, _CMP_LE_OQ));
    m = _mm256_and_pd(m, _mm256_cmp_pd(_mm256_loadu_pd(&boxes.hi_y[i]), qly, _CMP_GE_OQ));
    m = _mm256_and_pd(m, _mm256_cmp_pd(_mm256_loadu_pd(&boxes.lo_z[i]), qhz, _CMP_LE_OQ));
    m = _mm256_and_pd(m, _mm256_cmp_pd(_mm256_loadu_pd(&boxes.hi_z[i]), qlz, _CMP_GE_OQ));
    const int bits = _mm256_movemask_pd(m);
    for (int l = 0; l < 4; ++l) {
      const std::uint8_t hit = (bits >> l) & 1;
      mask[i + l] = hit;
      hits += hit;
    }
  }
  for (; i < n; ++i) {
    const bool overlap = boxes.lo_x[i] <= hi[0] && boxes.hi_x[i] >= lo[0] &&
                         boxes.lo_y[i] <= hi[1] && boxes.hi_y[i] >= lo[1] &&
                         boxes.lo_z[i] <= hi[2] && boxes.hi_z[i] >= lo[2];
    mask[i] = overlap ? 1 : 0;
    hits += overlap ? 1 : 0;
  }
  return hits;
}

}  // namespace

const Table& avx2_table() {
  static const Table t{dot_avx2, sum_squares_avx2, axpy_avx2, weighted_sq_dist_avx2,
                       aabb_overlaps_avx2};
  return t;
}

}  // namespace cnkz::kernels
