#pragma once

// Collision model for a team carrying a structure:
//   bases      oriented boxes, tested against obstacles and each other
//   arms       two capsules per robot (shoulder-elbow, elbow-tip) vs obstacles
//   structure  the structure boxes posed by a rigid fit of the contact points
//              onto the end-effectors, tested against obstacles
// Touching counts as contact. An AABB scan over the obstacles prunes the
// narrow-phase tests.

#include <string>
#include <vector>

#include "cnkz/kernels.hpp"
#include "cnkz/scenarios.hpp"

namespace cnkz {

struct CollisionReport {
  bool collision = false;
  std::string first;   // "base 0", "arm 1", "structure 0"
  std::string second;  // "obstacle 12", "base 2"
  bool fit_rejected = false;
  double fit_rms = 0.0;

  bool ok() const { return !collision && !fit_rejected; }
};

class CollisionChecker {
 public:
  /// fit_tolerance: largest accepted RMS of the contact-point fit.
  CollisionChecker(const RobotModel& model, const Structure& structure, const Environment& env,
                   double fit_tolerance);
  /// Uses twice the scenario's distance threshold as the fit tolerance.
  explicit CollisionChecker(const Scenario& s);

  /// Fit rejection is only reported when require_fit is set; geometry is
  /// always checked with the best-fit pose.
  CollisionReport check(const SystemConfiguration& q, bool require_fit = true) const;

  Obb base_box(std::span<const double> robot) const;
  RigidFit structure_fit(const SystemConfiguration& q) const;
  std::vector<Obb> structure_boxes(const RigidFit& fit) const;

  const Environment& environment() const { return env_; }
  double fit_tolerance() const { return fit_tolerance_; }

 private:
  bool hits_obstacle(const Aabb& broad, std::vector<std::uint8_t>& mask,
                     const auto& narrow, std::string& which) const;

  RobotModel model_;
  Structure structure_;
  Environment env_;
  double fit_tolerance_;
  kernels::BoxSoA soa_;
};

}  // namespace cnkz
