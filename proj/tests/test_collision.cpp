#include <random>

#include "doctest.h"

#include "cnkz/collision.hpp"
#include "support.hpp"

using namespace cnkz;

namespace {

Scenario with_obstacles(std::vector<Aabb> boxes) {
  Scenario s = reference_scenario("S_3");
  s.environment.obstacles = std::move(boxes);
  return s;
}

Aabb cube(const Vec3& c, double half) { return {c.array() - half, c.array() + half}; }

}  // namespace

TEST_SUITE("collision") {

TEST_CASE("free formation in an empty world") {
  const Scenario s = reference_scenario("S_3");
  const CollisionChecker c(s);
  const auto rep = c.check(s.configuration_at(s.start));
  CHECK(rep.ok());
  CHECK(rep.fit_rms < 1e-9);
  CHECK(c.fit_tolerance() == doctest::Approx(0.01));
}

TEST_CASE("each body part is checked") {
  const Scenario s0 = reference_scenario("S_3");
  const auto q = s0.configuration_at(s0.start);
  const Vec3 base0(q.block(0)[0], q.block(0)[1], q.block(0)[2]);
  const Vec3 tip0 = forward_kinematics(s0.model, q.block(0)).position;

  SUBCASE("base") {
    const auto rep = CollisionChecker(with_obstacles({cube(base0 + Vec3(0, 0.3, 0), 0.12)})).check(q);
    CHECK(rep.collision);
    CHECK(rep.first == "base 0");
    CHECK(rep.second == "obstacle 0");
  }
  SUBCASE("arm") {
    // Beside the arm link, off the beam and above the base.
    const auto rep = CollisionChecker(with_obstacles({cube(base0 + Vec3(0, 0.04, 0.32), 0.03)})).check(q);
    CHECK(rep.collision);
    CHECK(rep.first == "arm 0");
  }
  SUBCASE("structure") {
    // Above the beam midway between two contacts, clear of the arms.
    const Vec3 mid = 0.5 * (tip0 + forward_kinematics(s0.model, q.block(1)).position);
    const auto rep = CollisionChecker(with_obstacles({cube(mid + Vec3(0, 0, 0.05), 0.03)})).check(q);
    CHECK(rep.collision);
    CHECK(rep.first == "structure 0");
  }
  SUBCASE("bases against each other") {
    auto p = q;
    p.block(1)[dof::kX] = p.block(0)[dof::kX] + 0.3;
    p.block(1)[dof::kY] = p.block(0)[dof::kY];
    const auto rep = CollisionChecker(s0).check(p, false);
    CHECK(rep.collision);
    CHECK(rep.second == "base 1");
  }
  SUBCASE("fit tolerance") {
    auto p = q;
    p.block(2)[dof::kX] += 0.2;
    const CollisionChecker c(s0);
    CHECK(c.check(p).fit_rejected);
    CHECK_FALSE(c.check(p, false).fit_rejected);
    CHECK(c.check(p, false).fit_rms > 0.01);
  }
}

TEST_CASE("reported contacts agree with a point-sampling oracle") {
  // Bases against random obstacles: any sampled base point inside an obstacle
  // proves a collision; a clean report must have no such point.
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1, 1), side(0.05, 0.6);
  const RobotModel m = RobotModel::make_default();
  int proven = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Aabb> obs;
    for (int k = 0; k < 3; ++k) {
      const Vec3 c(5 + 1.2 * u(rng), 5 + 1.2 * u(rng), 0.5 + 0.5 * u(rng));
      obs.push_back({c.array() - side(rng), c.array() + side(rng)});
    }
    Environment env;
    env.obstacles = obs;
    const CollisionChecker checker(m, make_structure(StructureKind::Straight, 0.5, 0.5), env, 1.0);
    SystemConfiguration q(1, 6);
    q.block(0)[0] = 5 + u(rng);
    q.block(0)[1] = 5 + u(rng);
    q.block(0)[2] = 0.5;
    q.block(0)[3] = 3 * u(rng);
    q.block(0)[4] = -1.5;  // arm folded down inside the base region
    const Obb b = checker.base_box(q.block(0));
    bool inside = false;
    for (int s = 0; s < 3000 && !inside; ++s) {
      const Vec3 p = b.center + b.axes * Vec3(u(rng), u(rng), u(rng)).cwiseProduct(b.half);
      for (const auto& o : obs) inside = inside || o.contains(p);
    }
    const auto rep = checker.check(q, false);
    if (inside) {
      ++proven;
      CHECK(rep.collision);
    }
  }
  CHECK(proven > 30);
}

TEST_CASE("results do not depend on the kernel variant") {
  const Scenario s = reference_scenario("S_3").with_environment(Complexity::Hard, 3);
  const CollisionChecker c(s);
  std::mt19937_64 rng(2);
  const auto before = kernels::active_isa();
  for (int k = 0; k < 100; ++k) {
    auto q = test::random_team(3, rng, s.model, 8.0);
    for (int i = 0; i < 3; ++i) {
      q.block(i)[0] += 10;
      q.block(i)[1] += 10;
    }
    kernels::set_active(kernels::Isa::Scalar);
    const auto a = c.check(q);
    kernels::set_active(before);
    const auto b = c.check(q);
    CHECK(a.collision == b.collision);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
  }
}

}
