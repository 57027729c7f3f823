#include <cmath>

#include "cnkz/kernels.hpp"
#include "kernels_impl.hpp"

namespace cnkz::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (std::size_t l = 0; l < 4; ++l) acc[l] += a[i + l] * b[i + l];
  }
  double s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares_scalar(const double* a, std::size_t n) { return dot_scalar(a, a, n); }

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

inline double wrapped(double d, double period) {
  return period > 0.0 ? d - period * std::nearbyint(d / period) : d;
}

void weighted_sq_dist_scalar(const double* points, std::size_t count, std::size_t dim,
                             const double* query, const double* weight, const double* period,
                             double* out) {
  for (std::size_t p = 0; p < count; ++p) {
    const double* row = points + p * dim;
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t d = 0;
    for (; d + 4 <= dim; d += 4) {
      for (std::size_t l = 0; l < 4; ++l) {
        const double diff = wrapped(row[d + l] - query[d + l], period[d + l]);
        acc[l] += weight[d + l] * (diff * diff);
      }
    }
    double s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (; d < dim; ++d) {
      const double diff = wrapped(row[d] - query[d], period[d]);
      s += weight[d] * (diff * diff);
    }
    out[p] = s;
  }
}

std::size_t aabb_overlaps_scalar(const BoxSoA& boxes, const double lo[3], const double hi[3],
                                 std::uint8_t* mask) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const bool overlap = boxes.lo_x[i] <= hi[0] && boxes.hi_x[i] >= lo[0] &&
                         boxes.lo_y[i] <= hi[1] && boxes.hi_y[i] >= lo[1] &&
                         boxes.lo_z[i] <= hi[2] && boxes.hi_z[i] >= lo[2];
    mask[i] = overlap ? 1 : 0;
    hits += overlap ? 1 : 0;
  }
  return hits;
}

}  // namespace

const Table& scalar_table() {
  static const Table t{dot_scalar, sum_squares_scalar, axpy_scalar, weighted_sq_dist_scalar,
                       aabb_overlaps_scalar};
  return t;
}

}  // namespace cnkz::kernels
