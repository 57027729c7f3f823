#pragma once

#include <random>

#include "cnkz/scenarios.hpp"

namespace cnkz::test {

/// Team near the origin with arms inside their limits.
inline SystemConfiguration random_team(int team, std::mt19937_64& rng,
                                       const RobotModel& model = RobotModel::make_default(),
                                       double spread = 2.0) {
  std::uniform_real_distribution<double> pos(-spread, spread), yaw(-3.1, 3.1), arm(-1.5, 1.5),
      vel(-0.9, 0.9);
  SystemConfiguration q(team, model.dof());
  for (int i = 0; i < team; ++i) {
    auto b = q.block(i);
    b[dof::kX] = pos(rng);
    b[dof::kY] = pos(rng);
    b[dof::kZ] = 0.5 + 0.1 * pos(rng);
    b[dof::kYaw] = yaw(rng);
    b[dof::kArm1] = arm(rng);
    b[dof::kArm2] = arm(rng);
    if (model.with_velocity) {
      b[dof::kVelX] = vel(rng);
      b[dof::kVelY] = vel(rng);
    }
  }
  return q;
}

inline std::vector<ManifoldSpec> specs(std::initializer_list<ManifoldKind> kinds) {
  std::vector<ManifoldSpec> out;
  for (auto k : kinds) out.push_back(ManifoldSpec::defaults(k));
  return out;
}

}  // namespace cnkz::test
