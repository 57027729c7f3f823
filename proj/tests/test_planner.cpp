#include <random>

#include "doctest.h"

#include "cnkz/planner.hpp"
#include "support.hpp"

using namespace cnkz;

namespace {

Scenario nearby_goal(const std::string& id, double dx) {
  Scenario s = reference_scenario(id);
  s.goal = s.start;
  s.goal.position.x() += dx;
  return s;
}

PlannerParams small(std::uint64_t seed = 1) {
  PlannerParams p;
  p.max_nodes = 400;
  p.goal_bias = 0.3;
  p.rng_seed = seed;
  return p;
}

}  // namespace

TEST_SUITE("planner") {

TEST_CASE("metric is a weighted Euclidean distance with wrapped yaw") {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 200; ++k) {
    const auto a = test::random_team(3, rng), b = test::random_team(3, rng), c = test::random_team(3, rng);
    CHECK(configuration_metric(a, a) == 0.0);
    CHECK(configuration_metric(a, b) == doctest::Approx(configuration_metric(b, a)));
    CHECK(configuration_metric(a, c) <= configuration_metric(a, b) + configuration_metric(b, c) + 1e-12);
  }
  SystemConfiguration a(1, 6), b(1, 6);
  a.block(0)[dof::kYaw] = M_PI - 0.1;
  b.block(0)[dof::kYaw] = -M_PI + 0.1;
  CHECK(configuration_metric(a, b) == doctest::Approx(0.5 * 0.2));
  b = a;
  b.block(0)[dof::kX] = 3.0;
  b.block(0)[dof::kArm1] = 1.0;
  CHECK(configuration_metric(a, b) == doctest::Approx(std::sqrt(9.0 + 0.04)));
  CHECK_THROWS_AS(configuration_metric(a, SystemConfiguration(2, 6)), StructuralError);
}

TEST_CASE("start equal to goal gives a one-node path") {
  const Scenario s = nearby_goal("S_3", 0.0);
  const auto r = plan(s, small());
  CHECK(r.success);
  CHECK(r.path == std::vector<long>{0});
}

TEST_CASE("short plans are valid node by node") {
  for (const char* id : {"S_3", "T_3"}) {
    CAPTURE(id);
    const Scenario s = nearby_goal(id, 1.5).with_environment(Complexity::Low, 2);
    const auto p = small(3);
    const auto r = plan(s, p);
    REQUIRE(r.success);
    const auto sys = s.system();
    const CollisionChecker checker(s);
    const auto wps = r.waypoints();
    CHECK(wps.front() == s.configuration_at(s.start));
    CHECK(configuration_metric(wps.back(), s.configuration_at(s.goal)) <= p.goal_tolerance);
    for (const auto& q : wps) CHECK(audit_node(sys, checker, q).ok());
    for (std::size_t k = 1; k < r.path.size(); ++k) {
      const auto& node = r.nodes[std::size_t(r.path[k])];
      CHECK(node.parent == r.path[k - 1]);
    }
    CHECK(r.stats.projections_succeeded <= r.stats.projections_attempted);
    CHECK(r.stats.extensions <= p.extension_budget());
  }
}

TEST_CASE("obstacle-free translation across the workspace") {
  const Scenario s = reference_scenario("S_3");
  REQUIRE(s.environment.obstacles.empty());
  int successes = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    PlannerParams p;
    p.rng_seed = seed;
    const auto r = plan(s, p);
    successes += r.success ? 1 : 0;
    CHECK(long(r.nodes.size()) <= p.max_nodes);
  }
  CHECK(successes >= 19);
}

TEST_CASE("plain RRT without constraints") {
  const RobotModel m = RobotModel::make_default();
  const Structure st = make_custom_structure({Vec3::Zero()});
  const auto sys = ConstraintSystem::assemble({}, m, 1, st);
  Environment env;
  env.obstacles.push_back({Vec3(9, 0, 0), Vec3(10, 14, 20)});
  const CollisionChecker checker(m, st, env, 1e9);
  SystemConfiguration start(1, 6), goal(1, 6);
  start.block(0)[dof::kX] = 5;
  goal.block(0)[dof::kX] = 14;
  for (auto* q : {&start, &goal}) {
    q->block(0)[dof::kY] = 5;
    q->block(0)[dof::kZ] = 1;
  }
  PlannerParams p;
  p.project = false;
  p.steer_step = 1.0;
  p.max_nodes = 4000;
  p.sampler = Sampler::Uniform;
  p.goal_bias = 0.2;
  const auto r = plan(sys, checker, start, goal, p);
  REQUIRE(r.success);
  CHECK(r.stats.projections_attempted == 0);
  // The wall spans x in [9, 10], y up to 14 and the full height: go around it.
  double max_y = 0.0;
  for (const auto& q : r.waypoints()) max_y = std::max(max_y, q.block(0)[dof::kY]);
  CHECK(max_y > 14.0);
  for (const auto& q : r.waypoints()) CHECK(checker.check(q).ok());
}

TEST_CASE("same seed, same tree; larger budgets extend the same tree") {
  const Scenario s = reference_scenario("S_3").with_environment(Complexity::Medium, 4);
  PlannerParams p = small(9);
  p.max_nodes = 60;
  const auto a = plan(s, p), b = plan(s, p);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t k = 0; k < a.nodes.size(); ++k) {
    CHECK(a.nodes[k].q == b.nodes[k].q);
    CHECK(a.nodes[k].parent == b.nodes[k].parent);
  }
  CHECK(long(a.nodes.size()) <= p.max_nodes);
  if (!a.success) {
    p.max_nodes = 120;
    const auto c = plan(s, p);
    REQUIRE(c.nodes.size() >= a.nodes.size());
    for (std::size_t k = 0; k < a.nodes.size(); ++k) CHECK(c.nodes[k].q == a.nodes[k].q);
  }
}

TEST_CASE("invalid endpoints and parameters are rejected") {
  Scenario s = reference_scenario("S_3");
  s.environment.obstacles.push_back({Vec3(16, 16, 0), Vec3(18, 18, 2)});
  CHECK_THROWS_AS(plan(s, small()), StructuralError);

  const Scenario ok = reference_scenario("S_3");
  auto bent = ok.configuration_at(ok.start);
  bent.block(1)[dof::kX] += 0.3;
  CHECK_THROWS_AS(plan(ok.system(), CollisionChecker(ok), bent, ok.configuration_at(ok.goal), small()),
                  StructuralError);

  PlannerParams p;
  p.steer_step = 0.0;
  CHECK_THROWS_AS(p.validate(), StructuralError);
  p = {};
  p.goal_bias = 1.5;
  CHECK_THROWS_AS(p.validate(), StructuralError);
  CHECK(PlannerParams{}.extension_budget() == 250000);
  CHECK(sampler_from_string(to_string(Sampler::Uniform)) == Sampler::Uniform);
}

}
