#pragma once

// Data-parallel inner loops shared by the solvers and the planner.
//
// Every kernel has a scalar reference and (on x86-64) an AVX2 variant. The
// scalar reference accumulates in the same four-lane order as the vector code
// and the build disables FP contraction, so both variants return bit-identical
// results. The active variant is picked once at startup from CPUID and can be
// pinned with CNKZ_KERNELS=scalar|avx2.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace cnkz::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

/// Structure-of-arrays axis-aligned boxes for the broad-phase overlap scan.
struct BoxSoA {
  std::vector<double> lo_x, lo_y, lo_z;
  std::vector<double> hi_x, hi_y, hi_z;

  std::size_t size() const { return lo_x.size(); }
  void clear();
  void push(const double lo[3], const double hi[3]);
};

struct Table {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[p] = sum_d weight[d] * wrap(points[p*dim+d] - query[d])^2, where
  // wrap subtracts the nearest multiple of period[d] (period 0 disables it).
  void (*weighted_sq_dist)(const double* points, std::size_t count, std::size_t dim,
                           const double* query, const double* weight, const double* period,
                           double* out);
  // mask[i] = 1 iff box i overlaps [lo, hi] (closed intervals); returns the count.
  std::size_t (*aabb_overlaps)(const BoxSoA& boxes, const double lo[3], const double hi[3],
                               std::uint8_t* mask);
};

const Table& scalar_table();
bool available(Isa isa);
const Table& table(Isa isa);

Isa active_isa();
const Table& active();
// Test hook; not thread-safe against concurrent kernel calls.
void set_active(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double sum_squares(std::span<const double> a) {
  return active().sum_squares(a.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace cnkz::kernels
