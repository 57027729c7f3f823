#include "cnkz/collision.hpp"

namespace cnkz {

CollisionChecker::CollisionChecker(const RobotModel& model, const Structure& structure,
                                   const Environment& env, double fit_tolerance)
    : model_(model), structure_(structure), env_(env), fit_tolerance_(fit_tolerance) {
  for (const auto& o : env_.obstacles) soa_.push(o.lo.data(), o.hi.data());
}

namespace {

double fit_tolerance_for(const Scenario& s) {
  for (const auto& m : s.manifolds) {
    if (m.kind == ManifoldKind::StructureFixedDistance) return 2.0 * m.threshold;
  }
  return 2.0 * ManifoldSpec::defaults(ManifoldKind::StructureFixedDistance).threshold;
}

}  // namespace

CollisionChecker::CollisionChecker(const Scenario& s)
    : CollisionChecker(s.model, s.structure, s.environment, fit_tolerance_for(s)) {}

Obb CollisionChecker::base_box(std::span<const double> robot) const {
  return {Vec3(robot[dof::kX], robot[dof::kY], robot[dof::kZ]), yaw_rotation(robot[dof::kYaw]),
          model_.base_half_extents};
}

RigidFit CollisionChecker::structure_fit(const SystemConfiguration& q) const {
  std::vector<Vec3> ee(std::size_t(q.robots()));
  for (int i = 0; i < q.robots(); ++i) ee[i] = forward_kinematics(model_, q.block(i)).position;
  return fit_rigid(structure_.contact_points(), ee);
}

std::vector<Obb> CollisionChecker::structure_boxes(const RigidFit& fit) const {
  std::vector<Obb> out;
  for (const auto& b : structure_.boxes()) {
    out.push_back({fit.rotation * b.center + fit.translation, fit.rotation * b.axes, b.half});
  }
  return out;
}

bool CollisionChecker::hits_obstacle(const Aabb& broad, std::vector<std::uint8_t>& mask,
                                     const auto& narrow, std::string& which) const {
  if (soa_.size() == 0) return false;
  if (kernels::active().aabb_overlaps(soa_, broad.lo.data(), broad.hi.data(), mask.data()) == 0) {
    return false;
  }
  for (std::size_t k = 0; k < soa_.size(); ++k) {
    if (mask[k] && narrow(env_.obstacles[k])) {
      which = "obstacle " + std::to_string(k);
      return true;
    }
  }
  return false;
}

CollisionReport CollisionChecker::check(const SystemConfiguration& q, bool require_fit) const {
  CollisionReport rep;
  std::vector<std::uint8_t> mask(soa_.size());
  const int n = q.robots();
  auto hit = [&](std::string first, std::string second) {
    rep.collision = true;
    rep.first = std::move(first);
    rep.second = std::move(second);
    return rep;
  };

  std::vector<Obb> bases;
  for (int i = 0; i < n; ++i) {
    bases.push_back(base_box(q.block(i)));
    const Obb& b = bases.back();
    std::string which;
    auto narrow = [&](const Aabb& o) { return overlaps(b, Obb::from_aabb(o)); };
    if (hits_obstacle(b.bounds(), mask, narrow, which)) return hit("base " + std::to_string(i), which);
  }

  const double r = model_.link_radius;
  for (int i = 0; i < n; ++i) {
    const auto pts = arm_points(model_, q.block(i));
    for (int s = 0; s < 2; ++s) {
      const Vec3& a = pts[s];
      const Vec3& c = pts[s + 1];
      const Aabb broad{a.cwiseMin(c).array() - r, a.cwiseMax(c).array() + r};
      std::string which;
      auto narrow = [&](const Aabb& o) { return distance_segment_aabb(a, c, o) <= r; };
      if (hits_obstacle(broad, mask, narrow, which)) return hit("arm " + std::to_string(i), which);
    }
  }

  if (structure_.contacts() == n) {
    const RigidFit fit = structure_fit(q);
    rep.fit_rms = fit.rms;
    rep.fit_rejected = require_fit && fit.rms > fit_tolerance_;
    const auto boxes = structure_boxes(fit);
    for (std::size_t k = 0; k < boxes.size(); ++k) {
      std::string which;
      auto narrow = [&](const Aabb& o) { return overlaps(boxes[k], Obb::from_aabb(o)); };
      if (hits_obstacle(boxes[k].bounds(), mask, narrow, which)) {
        return hit("structure " + std::to_string(k), which);
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (overlaps(bases[i], bases[j])) return hit("base " + std::to_string(i), "base " + std::to_string(j));
    }
  }
  return rep;
}

}  // namespace cnkz
