#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "cnkz/kinematics.hpp"

namespace cnkz {

using Mat3 = Eigen::Matrix3d;

struct Aabb {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 half() const { return 0.5 * (hi - lo); }
  double volume() const { return (hi - lo).prod(); }
  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
  bool overlaps(const Aabb& o) const {
    return (lo.array() <= o.hi.array()).all() && (hi.array() >= o.lo.array()).all();
  }
};

/// Oriented box: columns of `axes` are the box frame's unit axes in world frame.
struct Obb {
  Vec3 center = Vec3::Zero();
  Mat3 axes = Mat3::Identity();
  Vec3 half = Vec3::Zero();

  static Obb from_aabb(const Aabb& b) { return {b.center(), Mat3::Identity(), b.half()}; }
  Aabb bounds() const;
  bool contains(const Vec3& p, double tol = 0.0) const;
};

/// Closed-set separating-axis test (touching counts as overlap).
bool overlaps(const Obb& a, const Obb& b);

double distance_point_aabb(const Vec3& p, const Aabb& box);
double distance_segment_aabb(const Vec3& a, const Vec3& b, const Aabb& box);

inline Mat3 yaw_rotation(double yaw) {
  return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

/// Least-squares rigid transform mapping `from` onto `to` (Kabsch, no scaling).
struct RigidFit {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double rms = 0.0;
};

RigidFit fit_rigid(std::span<const Vec3> from, std::span<const Vec3> to);

}  // namespace cnkz
