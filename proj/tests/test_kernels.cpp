#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"

#include "cnkz/kernels.hpp"

using namespace cnkz::kernels;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::vector<double> noise(std::mt19937_64& rng, std::size_t n, double scale = 10.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar reference matches naive loops") {
  std::mt19937_64 rng(11);
  const Table& s = scalar_table();
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 18u, 37u}) {
    const auto a = noise(rng, n), b = noise(rng, n);
    double naive = 0.0;
    for (std::size_t i = 0; i < n; ++i) naive += a[i] * b[i];
    CHECK(s.dot(a.data(), b.data(), n) == doctest::Approx(naive).epsilon(1e-12));
    double sq = 0.0;
    for (double x : a) sq += x * x;
    CHECK(s.sum_squares(a.data(), n) == doctest::Approx(sq).epsilon(1e-12));
    auto y = b;
    s.axpy(0.5, a.data(), y.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == b[i] + 0.5 * a[i]);
  }
}

TEST_CASE("weighted distance wraps periodic coordinates") {
  const double pts[] = {3.0, 0.0, -3.0, 1.0};
  const double query[] = {-3.0, 0.0};
  const double w[] = {2.0, 1.0};
  const double period[] = {2.0 * M_PI, 0.0};
  double out[2];
  scalar_table().weighted_sq_dist(pts, 2, 2, query, w, period, out);
  const double d0 = 6.0 - 2.0 * M_PI;
  CHECK(out[0] == doctest::Approx(2.0 * d0 * d0));
  CHECK(out[1] == doctest::Approx(1.0));
}

TEST_CASE("box scan treats touching as overlap") {
  BoxSoA boxes;
  const double a_lo[] = {0, 0, 0}, a_hi[] = {1, 1, 1};
  const double b_lo[] = {2, 2, 2}, b_hi[] = {3, 3, 3};
  boxes.push(a_lo, a_hi);
  boxes.push(b_lo, b_hi);
  const double q_lo[] = {1, 0.5, 0.5}, q_hi[] = {1.5, 0.6, 0.6};
  std::uint8_t mask[2];
  CHECK(scalar_table().aabb_overlaps(boxes, q_lo, q_hi, mask) == 1);
  CHECK(mask[0] == 1);
  CHECK(mask[1] == 0);
}

TEST_CASE("vector variant is bit-identical to the scalar reference") {
  if (!available(Isa::Avx2)) {
    MESSAGE("AVX2 not available on this machine; equivalence not exercised");
    return;
  }
  const Table& s = scalar_table();
  const Table& v = table(Isa::Avx2);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> len(0, 41);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = len(rng);
    const auto a = noise(rng, n), b = noise(rng, n);
    CHECK(same_bits(s.dot(a.data(), b.data(), n), v.dot(a.data(), b.data(), n)));
    CHECK(same_bits(s.sum_squares(a.data(), n), v.sum_squares(a.data(), n)));
    auto y1 = b, y2 = b;
    s.axpy(-1.25, a.data(), y1.data(), n);
    v.axpy(-1.25, a.data(), y2.data(), n);
    CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(double)) == 0);

    const std::size_t dim = 1 + len(rng) % 12, count = len(rng);
    const auto pts = noise(rng, dim * count), q = noise(rng, dim);
    auto w = noise(rng, dim, 1.0);
    std::vector<double> period(dim, 0.0);
    for (std::size_t d = 0; d < dim; d += 3) period[d] = 2.0 * M_PI;
    std::vector<double> o1(count), o2(count);
    s.weighted_sq_dist(pts.data(), count, dim, q.data(), w.data(), period.data(), o1.data());
    v.weighted_sq_dist(pts.data(), count, dim, q.data(), w.data(), period.data(), o2.data());
    CHECK(std::memcmp(o1.data(), o2.data(), count * sizeof(double)) == 0);

    BoxSoA boxes;
    for (std::size_t k = 0; k < count; ++k) {
      const auto c = noise(rng, 3), h = noise(rng, 3, 2.0);
      const double lo[] = {c[0] - std::abs(h[0]), c[1] - std::abs(h[1]), c[2] - std::abs(h[2])};
      const double hi[] = {c[0] + std::abs(h[0]), c[1] + std::abs(h[1]), c[2] + std::abs(h[2])};
      boxes.push(lo, hi);
    }
    const double lo[] = {-2, -2, -2}, hi[] = {2, 2, 2};
    std::vector<std::uint8_t> m1(count), m2(count);
    CHECK(s.aabb_overlaps(boxes, lo, hi, m1.data()) == v.aabb_overlaps(boxes, lo, hi, m2.data()));
    CHECK(m1 == m2);
  }
}

TEST_CASE("active variant can be pinned") {
  const Isa before = active_isa();
  set_active(Isa::Scalar);
  CHECK(active_isa() == Isa::Scalar);
  CHECK(&active() == &scalar_table());
  set_active(before);
  CHECK(isa_name(Isa::Avx2) == "avx2");
}

}
