#include <cmath>
#include <random>

#include <Eigen/Geometry>

#include "doctest.h"

#include "cnkz/kinematics.hpp"
#include "support.hpp"

using namespace cnkz;

namespace {

using Mat4 = Eigen::Matrix4d;

Mat4 translate(const Vec3& t) {
  Mat4 m = Mat4::Identity();
  m.block<3, 1>(0, 3) = t;
  return m;
}

Mat4 rotate(double angle, const Vec3& axis) {
  Mat4 m = Mat4::Identity();
  m.block<3, 3>(0, 0) = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  return m;
}

// Homogeneous chain: base pose, yaw, mount, shoulder, link 1, elbow, link 2.
EndEffector chain(const RobotModel& m, std::span<const double> q) {
  const Mat4 t = translate({q[0], q[1], q[2]}) * rotate(q[3], Vec3::UnitZ()) *
                 translate(m.arm_mount_offset) * rotate(q[4], Vec3::UnitX()) *
                 translate({0, 0, m.link_lengths[0]}) * rotate(q[5], Vec3::UnitX()) *
                 translate({0, 0, m.link_lengths[1]});
  return {t.block<3, 1>(0, 3), t.block<3, 1>(0, 2)};
}

}  // namespace

TEST_SUITE("kinematics") {

TEST_CASE("zero arm angles put the tip straight above the base") {
  const auto m = RobotModel::make_default();
  const double q[] = {1.0, 2.0, 0.3, 0.7, 0.0, 0.0};
  const auto ee = forward_kinematics(m, q);
  CHECK(ee.position.x() == doctest::Approx(1.0));
  CHECK(ee.position.y() == doctest::Approx(2.0));
  CHECK(ee.position.z() == doctest::Approx(0.8));
  CHECK(ee.orientation.z() == doctest::Approx(1.0));
}

TEST_CASE("forward kinematics agrees with a homogeneous transform chain") {
  const auto m = RobotModel::make_default();
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    const auto q = test::random_team(1, rng, m);
    const auto a = forward_kinematics(m, q.span());
    const auto b = chain(m, q.span());
    CHECK((a.position - b.position).norm() < 1e-12);
    CHECK((a.orientation - b.orientation).norm() < 1e-12);
    CHECK(a.orientation.norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("FK Jacobian matches central differences") {
  for (bool vel : {false, true}) {
    const auto m = RobotModel::make_default(vel);
    std::mt19937_64 rng(7);
    for (int k = 0; k < 100; ++k) {
      auto q = test::random_team(1, rng, m);
      const FkJacobian j = fk_jacobian(m, q.span());
      REQUIRE(j.cols() == m.dof());
      for (int d = 0; d < m.dof(); ++d) {
        auto p = q, n = q;
        p.block(0)[d] += 1e-6;
        n.block(0)[d] -= 1e-6;
        const auto ep = forward_kinematics(m, p.span()), en = forward_kinematics(m, n.span());
        Eigen::Matrix<double, 6, 1> fd;
        fd << (ep.position - en.position) / 2e-6, (ep.orientation - en.orientation) / 2e-6;
        CHECK((j.col(d) - fd).norm() < 1e-7);
      }
    }
  }
}

TEST_CASE("arm points run from shoulder to tip") {
  const auto m = RobotModel::make_default();
  const double q[] = {0, 0, 0, 0.3, 0.4, -0.9};
  const auto pts = arm_points(m, q);
  CHECK((pts[1] - pts[0]).norm() == doctest::Approx(m.link_lengths[0]));
  CHECK((pts[2] - pts[1]).norm() == doctest::Approx(m.link_lengths[1]));
  CHECK((pts[2] - forward_kinematics(m, q).position).norm() < 1e-12);
}

TEST_CASE("joint limits and configuration layout") {
  const auto m = RobotModel::make_default();
  const double ok[] = {0, 0, 0, 10.0, 1.5, -1.5};
  const double bad[] = {0, 0, 0, 0, 1.6, 0};
  CHECK(within_joint_limits(m, ok));
  CHECK_FALSE(within_joint_limits(m, bad));
  CHECK_THROWS_AS(SystemConfiguration(0, 6), StructuralError);
  CHECK_THROWS_AS(SystemConfiguration(2, 7), StructuralError);
  CHECK_THROWS_AS(SystemConfiguration(2, 6, Eigen::VectorXd::Zero(11)), StructuralError);

  RobotConfiguration rc{1, 2, 3, 4, {0.1, 0.2}, {}};
  std::vector<RobotConfiguration> robots{rc, rc};
  auto q = SystemConfiguration::from_robots(robots);
  CHECK(q.size() == 12);
  q.normalize_yaw();
  CHECK(q.robot(1).yaw == doctest::Approx(4.0 - 2.0 * M_PI));
  robots[1].velocity = std::array<double, 2>{0, 0};
  CHECK_THROWS_AS(SystemConfiguration::from_robots(robots), StructuralError);
}

TEST_CASE("angle wrapping lands in (-pi, pi]") {
  CHECK(wrap_angle(M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(3.0 * M_PI / 2.0) == doctest::Approx(-M_PI / 2.0));
  CHECK(wrap_angle(0.25) == 0.25);
}

}
