#pragma once

// RRT over the team configuration space. Each extension steers toward a
// sample, projects the result onto the constraint manifolds and keeps it only
// if the projection converged, joint limits hold and both the node and the
// interpolated edge are collision-free. Constraints are enforced at nodes
// only; interior edge points are checked for collision, not for constraints.
//
// Edge length bound: a child lies within steer_step of its steering target,
// and projection moves it further by at most the projection displacement, so
// an edge is at most steer_step + |projection step| long in the metric.

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "cnkz/collision.hpp"
#include "cnkz/scenarios.hpp"
#include "cnkz/solvers.hpp"

namespace cnkz {

/// Per-DoF metric weights (applied to differences, not squared differences).
struct MetricWeights {
  double position = 1.0;
  double yaw = 0.5;
  double arm = 0.2;
  double velocity = 0.1;
};

/// sqrt(sum (w_d * diff_d)^2) with yaw differences wrapped into (-pi, pi].
double configuration_metric(const SystemConfiguration& a, const SystemConfiguration& b,
                            const MetricWeights& w = {});

enum class Sampler {
  Formation,  // team centroid uniform in bounds, random heading, start formation
  Uniform,    // every DoF independently: positions in bounds, angles in limits
};

std::string to_string(Sampler s);
Sampler sampler_from_string(const std::string& s);

struct PlannerParams {
  long max_nodes = 5000;
  long max_extensions = 0;  // sampling iterations; 0 means 50 * max_nodes (runaway guard)
  double steer_step = 0.3;
  double goal_bias = 0.1;
  double goal_tolerance = 0.2;
  SolverParams projection;
  bool project = true;  // false: plain RRT, nodes are not projected
  Sampler sampler = Sampler::Formation;
  MetricWeights metric;
  std::uint64_t rng_seed = 0;

  void validate() const;
  long extension_budget() const { return max_extensions > 0 ? max_extensions : 50 * max_nodes; }
};

struct PlanNode {
  SystemConfiguration q;
  long parent = -1;
  std::vector<double> residual;  // unweighted rows at q
};

struct PlanStats {
  long extensions = 0;
  long projections_attempted = 0;
  long projections_succeeded = 0;
  long projection_updates = 0;  // single-row updates (NR/CIM iterations) summed
  long projection_failures = 0;
  long joint_limit_rejections = 0;
  long collision_rejections = 0;
  long edge_rejections = 0;
  long fit_rejections = 0;
  long goal_attempts = 0;
  std::chrono::nanoseconds projection_time{0};
  std::chrono::nanoseconds wall_time{0};
};

struct PlanResult {
  bool success = false;
  std::vector<PlanNode> nodes;
  std::vector<long> path;  // node indices start -> goal
  PlanStats stats;

  std::vector<SystemConfiguration> waypoints() const;
};

/// Start and goal must already satisfy the constraints and be valid.
PlanResult plan(const ConstraintSystem& sys, const CollisionChecker& checker,
                const SystemConfiguration& start, const SystemConfiguration& goal,
                const PlannerParams& params);

/// Start and goal come from the scenario's structure poses.
PlanResult plan(const Scenario& scenario, const PlannerParams& params);

/// Independent audit of one node: thresholds, joint limits and collision.
struct NodeAudit {
  bool constraints = true;
  bool joint_limits = true;
  bool collision_free = true;
  bool ok() const { return constraints && joint_limits && collision_free; }
};
NodeAudit audit_node(const ConstraintSystem& sys, const CollisionChecker& checker,
                     const SystemConfiguration& q);

}  // namespace cnkz
