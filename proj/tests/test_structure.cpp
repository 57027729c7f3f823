#include <cmath>
#include <random>

#include <Eigen/Geometry>

#include "doctest.h"

#include "cnkz/geometry.hpp"
#include "cnkz/structure.hpp"

using namespace cnkz;

TEST_SUITE("structure") {

TEST_CASE("straight structures space contacts evenly around the centroid") {
  for (int n = 2; n <= 6; ++n) {
    const double length = 0.5 * (n - 1);
    const Structure s = make_structure(StructureKind::Straight, length, 0.5);
    REQUIRE(s.contacts() == n);
    Vec3 c = Vec3::Zero();
    for (const auto& p : s.contact_points()) c += p;
    CHECK(c.norm() < 1e-12);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        CHECK(s.distance(i, j) == doctest::Approx(0.5 * std::abs(i - j)));
    if (n >= 3) {
      CHECK(s.triple(0, 1, 2).collinear);
      CHECK(s.triple(0, 1, 2).cosine == doctest::Approx(1.0));
    }
  }
  CHECK_THROWS_AS(make_structure(StructureKind::Straight, 1.2, 0.5), StructuralError);
  CHECK_THROWS_AS(make_structure(StructureKind::Straight, -1.0, 0.5), StructuralError);
}

TEST_CASE("T and I layouts") {
  const Structure t = make_structure(StructureKind::T);
  CHECK(t.contacts() == 3);
  CHECK(t.distance(0, 1) == doctest::Approx(1.0));
  CHECK(t.distance(0, 2) == doctest::Approx(std::sqrt(1.25)));
  CHECK_FALSE(t.triple(0, 1, 2).collinear);

  const Structure i = make_structure(StructureKind::I);
  CHECK(i.contacts() == 5);
  CHECK(i.distance(0, 4) == doctest::Approx(std::sqrt(2.0)));
  CHECK(i.triple(0, 2, 4).collinear);
  CHECK(i.boxes().size() == 3);
}

TEST_CASE("triple cross products are unit normals of the turn") {
  const Structure t = make_structure(StructureKind::T);
  const auto& e = t.triple(0, 1, 2);
  CHECK(e.cross.norm() == doctest::Approx(std::sqrt(1.0 - e.cosine * e.cosine)));
}

}

TEST_SUITE("structure") {

TEST_CASE("separating axis test on oriented boxes") {
  Obb a{Vec3::Zero(), Mat3::Identity(), Vec3(1, 1, 1)};
  Obb b{Vec3(2.0, 0, 0), Mat3::Identity(), Vec3(1, 1, 1)};
  CHECK(overlaps(a, b));  // touching faces
  b.center.x() = 2.01;
  CHECK_FALSE(overlaps(a, b));
  // Rotated by 45 degrees the corner reaches sqrt(2).
  b.axes = yaw_rotation(M_PI / 4);
  b.center.x() = 1.0 + std::sqrt(2.0) - 0.01;
  CHECK(overlaps(a, b));
  b.center.x() = 1.0 + std::sqrt(2.0) + 0.01;
  CHECK_FALSE(overlaps(a, b));
}

TEST_CASE("oriented box overlap agrees with point sampling") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1), ang(-M_PI, M_PI), sz(0.2, 1.0);
  auto random_box = [&] {
    Obb b;
    b.center = Vec3(u(rng), u(rng), u(rng)) * 1.5;
    b.axes = Eigen::AngleAxisd(ang(rng), Vec3(u(rng), u(rng), u(rng)).normalized()).toRotationMatrix();
    b.half = Vec3(sz(rng), sz(rng), sz(rng));
    return b;
  };
  int sampled_hits = 0;
  for (int k = 0; k < 200; ++k) {
    const Obb a = random_box(), b = random_box();
    // A sampled common point proves overlap; SAT must agree.
    bool common = false;
    for (int s = 0; s < 4000 && !common; ++s) {
      const Vec3 p = a.center + a.axes * Vec3(u(rng) * a.half.x(), u(rng) * a.half.y(), u(rng) * a.half.z());
      common = b.contains(p);
    }
    if (common) {
      ++sampled_hits;
      CHECK(overlaps(a, b));
    }
  }
  CHECK(sampled_hits > 20);
}

TEST_CASE("segment and point distances to boxes") {
  const Aabb box{Vec3::Zero(), Vec3::Ones()};
  CHECK(distance_point_aabb(Vec3(0.5, 0.5, 0.5), box) == 0.0);
  CHECK(distance_point_aabb(Vec3(2, 0.5, 0.5), box) == doctest::Approx(1.0));
  CHECK(distance_point_aabb(Vec3(2, 2, 0.5), box) == doctest::Approx(std::sqrt(2.0)));
  CHECK(distance_segment_aabb(Vec3(-1, 0.5, 3), Vec3(2, 0.5, 3), box) == doctest::Approx(2.0));
  CHECK(distance_segment_aabb(Vec3(-1, 0.5, 0.5), Vec3(2, 0.5, 0.5), box) == 0.0);

  // Dense sampling along the segment bounds the distance from above.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3, 4);
  for (int k = 0; k < 300; ++k) {
    const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
    double best = 1e9;
    for (int s = 0; s <= 2000; ++s) best = std::min(best, distance_point_aabb(a + (b - a) * (s / 2000.0), box));
    const double d = distance_segment_aabb(a, b, box);
    CHECK(d <= best + 1e-12);
    CHECK(d >= best - 0.01);
  }
}

TEST_CASE("rigid fit recovers a known transform") {
  std::vector<Vec3> from{{0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {0.5, 0.5, 1}};
  const Mat3 r = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  const Vec3 t(3, -1, 2);
  std::vector<Vec3> to;
  for (const auto& p : from) to.push_back(r * p + t);
  const RigidFit f = fit_rigid(from, to);
  CHECK((f.rotation - r).norm() < 1e-9);
  CHECK((f.translation - t).norm() < 1e-9);
  CHECK(f.rms < 1e-9);
  CHECK(f.rotation.determinant() == doctest::Approx(1.0));

  // Collinear points: any rotation about the line fits; the residual is still zero.
  std::vector<Vec3> line{{-1, 0, 0}, {0, 0, 0}, {1, 0, 0}};
  std::vector<Vec3> moved;
  for (const auto& p : line) moved.push_back(yaw_rotation(1.0) * p + t);
  const RigidFit g = fit_rigid(line, moved);
  CHECK(g.rms < 1e-9);
}

}
