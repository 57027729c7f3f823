#include "cnkz/kinematics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace cnkz {

double wrap_angle(double a) {
  constexpr double kPi = std::numbers::pi;
  a = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  return a <= -kPi ? a + 2.0 * kPi : a;
}

void RobotModel::validate() const {
  if (!(link_lengths[0] > 0.0) || !(link_lengths[1] > 0.0)) {
    throw StructuralError("robot model: link lengths must be positive");
  }
  if (joint_limits.size() != static_cast<std::size_t>(dof())) {
    throw StructuralError("robot model: expected " + std::to_string(dof()) +
                          " joint limits, got " + std::to_string(joint_limits.size()));
  }
  for (std::size_t i = 0; i < joint_limits.size(); ++i) {
    if (joint_limits[i].lo > joint_limits[i].hi) {
      throw StructuralError("robot model: joint_limits[" + std::to_string(i) + "] has lo > hi");
    }
  }
}

RobotModel RobotModel::make_default(bool with_velocity) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  RobotModel m;
  m.with_velocity = with_velocity;
  m.joint_limits = {{-kInf, kInf}, {-kInf, kInf}, {-kInf, kInf},
                    {-kInf, kInf}, {-kHalfPi, kHalfPi}, {-kHalfPi, kHalfPi}};
  if (with_velocity) {
    m.joint_limits.push_back({-1.0, 1.0});
    m.joint_limits.push_back({-1.0, 1.0});
  }
  return m;
}

SystemConfiguration::SystemConfiguration(int robots, int dof_per_robot)
    : robots_(robots), dof_(dof_per_robot), flat_(Eigen::VectorXd::Zero(robots * dof_per_robot)) {
  if (robots < 1) throw StructuralError("system configuration needs at least one robot");
  if (dof_per_robot != dof::kBase && dof_per_robot != dof::kWithVelocity) {
    throw StructuralError("system configuration: robot dof must be 6 or 8");
  }
}

SystemConfiguration::SystemConfiguration(int robots, int dof_per_robot, Eigen::VectorXd flat)
    : SystemConfiguration(robots, dof_per_robot) {
  if (flat.size() != robots * dof_per_robot) {
    throw StructuralError("system configuration: flat vector has length " +
                          std::to_string(flat.size()) + ", expected " +
                          std::to_string(robots * dof_per_robot));
  }
  flat_ = std::move(flat);
}

SystemConfiguration SystemConfiguration::from_robots(std::span<const RobotConfiguration> robots) {
  if (robots.empty()) throw StructuralError("system configuration needs at least one robot");
  const bool vel = robots.front().velocity.has_value();
  for (const auto& r : robots) {
    if (r.velocity.has_value() != vel) {
      throw StructuralError("system configuration: robots disagree on velocity DoFs");
    }
  }
  SystemConfiguration q(static_cast<int>(robots.size()), vel ? dof::kWithVelocity : dof::kBase);
  for (std::size_t i = 0; i < robots.size(); ++i) q.set_robot(static_cast<int>(i), robots[i]);
  return q;
}

RobotConfiguration SystemConfiguration::robot(int i) const {
  const auto b = block(i);
  RobotConfiguration rc{b[dof::kX], b[dof::kY], b[dof::kZ], b[dof::kYaw], {b[dof::kArm1], b[dof::kArm2]}, {}};
  if (dof_ == dof::kWithVelocity) rc.velocity = std::array<double, 2>{b[dof::kVelX], b[dof::kVelY]};
  return rc;
}

void SystemConfiguration::set_robot(int i, const RobotConfiguration& rc) {
  if (rc.velocity.has_value() != (dof_ == dof::kWithVelocity)) {
    throw StructuralError("robot configuration velocity DoFs do not match the system layout");
  }
  auto b = block(i);
  b[dof::kX] = rc.x;
  b[dof::kY] = rc.y;
  b[dof::kZ] = rc.z;
  b[dof::kYaw] = rc.yaw;
  b[dof::kArm1] = rc.arm[0];
  b[dof::kArm2] = rc.arm[1];
  if (rc.velocity) {
    b[dof::kVelX] = (*rc.velocity)[0];
    b[dof::kVelY] = (*rc.velocity)[1];
  }
}

std::vector<RobotConfiguration> SystemConfiguration::unflatten() const {
  std::vector<RobotConfiguration> out;
  out.reserve(robots_);
  for (int i = 0; i < robots_; ++i) out.push_back(robot(i));
  return out;
}

void SystemConfiguration::normalize_yaw() {
  for (int i = 0; i < robots_; ++i) block(i)[dof::kYaw] = wrap_angle(block(i)[dof::kYaw]);
}

namespace {

// Arm direction for angle phi measured from base +z, rotating about base +x.
inline Vec3 arm_dir(double phi) { return {0.0, -std::sin(phi), std::cos(phi)}; }
inline Vec3 arm_dir_d(double phi) { return {0.0, -std::cos(phi), -std::sin(phi)}; }

inline Vec3 rot_z(double c, double s, const Vec3& v) {
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()};
}
inline Vec3 rot_z_d(double c, double s, const Vec3& v) {
  return {-s * v.x() - c * v.y(), c * v.x() - s * v.y(), 0.0};
}

void check_dims(const RobotModel& model, std::span<const double> q) {
  if (q.size() != static_cast<std::size_t>(model.dof())) {
    throw StructuralError("robot configuration has " + std::to_string(q.size()) +
                          " DoFs, model expects " + std::to_string(model.dof()));
  }
}

}  // namespace

EndEffector forward_kinematics(const RobotModel& model, std::span<const double> q) {
  check_dims(model, q);
  const double c = std::cos(q[dof::kYaw]), s = std::sin(q[dof::kYaw]);
  const double phi1 = q[dof::kArm1], phi12 = q[dof::kArm1] + q[dof::kArm2];
  const Vec3 d12 = arm_dir(phi12);
  const Vec3 local = model.arm_mount_offset + model.link_lengths[0] * arm_dir(phi1) +
                     model.link_lengths[1] * d12;
  return {Vec3(q[dof::kX], q[dof::kY], q[dof::kZ]) + rot_z(c, s, local), rot_z(c, s, d12)};
}

EndEffector forward_kinematics(const RobotModel& model, const RobotConfiguration& rc) {
  std::array<double, dof::kWithVelocity> buf{rc.x, rc.y, rc.z, rc.yaw, rc.arm[0], rc.arm[1], 0.0, 0.0};
  if (rc.velocity) {
    buf[dof::kVelX] = (*rc.velocity)[0];
    buf[dof::kVelY] = (*rc.velocity)[1];
  }
  return forward_kinematics(model, std::span<const double>(buf.data(), rc.velocity ? 8 : 6));
}

FkJacobian fk_jacobian(const RobotModel& model, std::span<const double> q) {
  check_dims(model, q);
  FkJacobian j = FkJacobian::Zero(6, model.dof());
  const double c = std::cos(q[dof::kYaw]), s = std::sin(q[dof::kYaw]);
  const double phi1 = q[dof::kArm1], phi12 = q[dof::kArm1] + q[dof::kArm2];
  const double l1 = model.link_lengths[0], l2 = model.link_lengths[1];
  const Vec3 d12 = arm_dir(phi12);
  const Vec3 local = model.arm_mount_offset + l1 * arm_dir(phi1) + l2 * d12;

  j(0, dof::kX) = 1.0;
  j(1, dof::kY) = 1.0;
  j(2, dof::kZ) = 1.0;
  j.block<3, 1>(0, dof::kYaw) = rot_z_d(c, s, local);
  j.block<3, 1>(0, dof::kArm1) = rot_z(c, s, l1 * arm_dir_d(phi1) + l2 * arm_dir_d(phi12));
  j.block<3, 1>(0, dof::kArm2) = rot_z(c, s, l2 * arm_dir_d(phi12));

  j.block<3, 1>(3, dof::kYaw) = rot_z_d(c, s, d12);
  const Vec3 dori = rot_z(c, s, arm_dir_d(phi12));
  j.block<3, 1>(3, dof::kArm1) = dori;
  j.block<3, 1>(3, dof::kArm2) = dori;
  return j;
}

std::array<Vec3, 3> arm_points(const RobotModel& model, std::span<const double> q) {
  check_dims(model, q);
  const double c = std::cos(q[dof::kYaw]), s = std::sin(q[dof::kYaw]);
  const Vec3 base(q[dof::kX], q[dof::kY], q[dof::kZ]);
  const Vec3 shoulder = model.arm_mount_offset;
  const Vec3 elbow = shoulder + model.link_lengths[0] * arm_dir(q[dof::kArm1]);
  const Vec3 tip = elbow + model.link_lengths[1] * arm_dir(q[dof::kArm1] + q[dof::kArm2]);
  return {base + rot_z(c, s, shoulder), base + rot_z(c, s, elbow), base + rot_z(c, s, tip)};
}

bool within_joint_limits(const RobotModel& model, std::span<const double> q) {
  for (int d = 0; d < model.dof(); ++d) {
    if (d == dof::kYaw) continue;
    if (!model.joint_limits[d].contains(q[d])) return false;
  }
  return true;
}

bool within_joint_limits(const RobotModel& model, const SystemConfiguration& q) {
  for (int i = 0; i < q.robots(); ++i) {
    if (!within_joint_limits(model, q.block(i))) return false;
  }
  return true;
}

}  // namespace cnkz
