#pragma once

// Simulated mobile manipulator: a cube base with (x, y, z, yaw) and a planar
// two-link arm in the base body's Y-Z plane. Optional planar velocity DoFs
// ride along in the configuration vector for the differential-drive manifold.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace cnkz {

using Vec3 = Eigen::Vector3d;

/// Thrown for dimension mismatches, inapplicable manifolds, invalid scenarios
/// and other contract violations detected before any numerical work starts.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Index of each scalar inside one robot's configuration block.
namespace dof {
inline constexpr int kX = 0;
inline constexpr int kY = 1;
inline constexpr int kZ = 2;
inline constexpr int kYaw = 3;
inline constexpr int kArm1 = 4;
inline constexpr int kArm2 = 5;
inline constexpr int kVelX = 6;
inline constexpr int kVelY = 7;
inline constexpr int kBase = 6;
inline constexpr int kWithVelocity = 8;
}  // namespace dof

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
};

double wrap_angle(double a);  // into (-pi, pi]

struct RobotModel {
  Vec3 base_half_extents{0.2, 0.2, 0.2};
  std::array<double, 2> link_lengths{0.2, 0.1};
  Vec3 arm_mount_offset{0.0, 0.0, 0.2};
  // One interval per DoF; yaw is unconstrained.
  std::vector<Interval> joint_limits;
  bool with_velocity = false;
  double link_radius = 0.02;  // capsule radius used for arm collision

  int dof() const { return with_velocity ? dof::kWithVelocity : dof::kBase; }
  void validate() const;

  static RobotModel make_default(bool with_velocity = false);
};

struct RobotConfiguration {
  double x = 0.0, y = 0.0, z = 0.0, yaw = 0.0;
  std::array<double, 2> arm{0.0, 0.0};
  std::optional<std::array<double, 2>> velocity;
};

/// Stacked configuration of an n-robot team, stored flat (m = n * r).
class SystemConfiguration {
 public:
  SystemConfiguration() = default;
  SystemConfiguration(int robots, int dof_per_robot);
  SystemConfiguration(int robots, int dof_per_robot, Eigen::VectorXd flat);

  static SystemConfiguration from_robots(std::span<const RobotConfiguration> robots);

  int robots() const { return robots_; }
  int dof_per_robot() const { return dof_; }
  std::size_t size() const { return static_cast<std::size_t>(flat_.size()); }

  RobotConfiguration robot(int i) const;
  void set_robot(int i, const RobotConfiguration& rc);
  std::vector<RobotConfiguration> unflatten() const;

  std::span<const double> block(int i) const { return {flat_.data() + i * dof_, std::size_t(dof_)}; }
  std::span<double> block(int i) { return {flat_.data() + i * dof_, std::size_t(dof_)}; }
  std::span<const double> span() const { return {flat_.data(), size()}; }
  std::span<double> span() { return {flat_.data(), size()}; }

  const Eigen::VectorXd& flat() const { return flat_; }
  Eigen::VectorXd& flat() { return flat_; }

  void normalize_yaw();

  bool operator==(const SystemConfiguration& o) const {
    return robots_ == o.robots_ && dof_ == o.dof_ && flat_ == o.flat_;
  }

 private:
  int robots_ = 0;
  int dof_ = dof::kBase;
  Eigen::VectorXd flat_;
};

struct EndEffector {
  Vec3 position;
  Vec3 orientation;  // unit direction of the distal link
};

using FkJacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

EndEffector forward_kinematics(const RobotModel& model, std::span<const double> q);
EndEffector forward_kinematics(const RobotModel& model, const RobotConfiguration& rc);

/// Rows 0-2 are d(position)/dq, rows 3-5 d(orientation)/dq; velocity columns are zero.
FkJacobian fk_jacobian(const RobotModel& model, std::span<const double> q);

/// Arm joint points from shoulder to tip in world frame.
std::array<Vec3, 3> arm_points(const RobotModel& model, std::span<const double> q);

bool within_joint_limits(const RobotModel& model, std::span<const double> q);
bool within_joint_limits(const RobotModel& model, const SystemConfiguration& q);

}  // namespace cnkz
