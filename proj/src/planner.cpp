#include "cnkz/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "cnkz/kernels.hpp"

namespace cnkz {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double dof_weight(int d, const MetricWeights& w) {
  if (d == dof::kYaw) return w.yaw;
  if (d == dof::kArm1 || d == dof::kArm2) return w.arm;
  if (d >= dof::kVelX) return w.velocity;
  return w.position;
}

// Difference b - a with yaw wrapped.
Eigen::VectorXd difference(const SystemConfiguration& a, const SystemConfiguration& b) {
  Eigen::VectorXd d = b.flat() - a.flat();
  const int r = a.dof_per_robot();
  for (int i = 0; i < a.robots(); ++i) d[i * r + dof::kYaw] = wrap_angle(d[i * r + dof::kYaw]);
  return d;
}

SystemConfiguration advance(const SystemConfiguration& a, const Eigen::VectorXd& diff, double t) {
  SystemConfiguration q(a.robots(), a.dof_per_robot(), a.flat() + t * diff);
  q.normalize_yaw();
  return q;
}

}  // namespace

double configuration_metric(const SystemConfiguration& a, const SystemConfiguration& b,
                            const MetricWeights& w) {
  if (a.robots() != b.robots() || a.dof_per_robot() != b.dof_per_robot()) {
    throw StructuralError("configuration_metric: dimension mismatch");
  }
  const Eigen::VectorXd d = difference(a, b);
  const int r = a.dof_per_robot();
  double s = 0.0;
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    const double v = dof_weight(int(k % r), w) * d[k];
    s += v * v;
  }
  return std::sqrt(s);
}

std::string to_string(Sampler s) { return s == Sampler::Formation ? "formation" : "uniform"; }

Sampler sampler_from_string(const std::string& s) {
  if (s == "formation") return Sampler::Formation;
  if (s == "uniform") return Sampler::Uniform;
  throw StructuralError("unknown sampler '" + s + "' (expected formation or uniform)");
}

void PlannerParams::validate() const {
  if (max_nodes < 1) throw StructuralError("planner: max_nodes must be >= 1");
  if (max_extensions < 0) throw StructuralError("planner: max_extensions must be >= 0");
  if (!(steer_step > 0.0)) throw StructuralError("planner: steer_step must be > 0");
  if (!(goal_bias >= 0.0 && goal_bias <= 1.0)) throw StructuralError("planner: goal_bias must be in [0, 1]");
  if (!(goal_tolerance > 0.0)) throw StructuralError("planner: goal_tolerance must be > 0");
  projection.validate();
}

std::vector<SystemConfiguration> PlanResult::waypoints() const {
  std::vector<SystemConfiguration> out;
  for (long i : path) out.push_back(nodes[std::size_t(i)].q);
  return out;
}

NodeAudit audit_node(const ConstraintSystem& sys, const CollisionChecker& checker,
                     const SystemConfiguration& q) {
  NodeAudit a;
  a.constraints = sys.satisfied(sys.evaluate(q));
  a.joint_limits = within_joint_limits(sys.model(), q);
  const Aabb& bounds = checker.environment().bounds;
  for (int i = 0; i < q.robots() && a.joint_limits; ++i) {
    const auto b = q.block(i);
    a.joint_limits = bounds.contains(Vec3(b[dof::kX], b[dof::kY], b[dof::kZ]));
  }
  a.collision_free = checker.check(q).ok();
  return a;
}

namespace {

class Rrt {
 public:
  Rrt(const ConstraintSystem& sys, const CollisionChecker& checker, const SystemConfiguration& start,
      const SystemConfiguration& goal, const PlannerParams& p)
      : sys_(sys), checker_(checker), start_(start), goal_(goal), p_(p), rng_(p.rng_seed),
        dim_(start.size()), r_(start.dof_per_robot()) {
    weights_.resize(dim_);
    period_.resize(dim_);
    for (std::size_t k = 0; k < dim_; ++k) {
      const double w = dof_weight(int(k % r_), p.metric);
      weights_[k] = w * w;
      period_[k] = int(k % r_) == dof::kYaw ? kTwoPi : 0.0;
    }
    centroid_ = Vec3::Zero();
    for (int i = 0; i < start.robots(); ++i) centroid_ += base(start, i);
    centroid_ /= double(start.robots());
  }

  PlanResult run() {
    const auto t0 = Clock::now();
    add({start_, -1, sys_.evaluate(start_)});
    if (!try_goal(0)) {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      while (res_.stats.extensions < p_.extension_budget() && long(res_.nodes.size()) < p_.max_nodes) {
        ++res_.stats.extensions;
        const bool to_goal = unit(rng_) < p_.goal_bias;
        const SystemConfiguration target = to_goal ? goal_ : sample();
        const long near = nearest(target);
        const long added = extend(near, target);
        if (added >= 0 && try_goal(added)) break;
      }
    }
    res_.stats.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0);
    return std::move(res_);
  }

 private:
  static Vec3 base(const SystemConfiguration& q, int i) {
    const auto b = q.block(i);
    return {b[dof::kX], b[dof::kY], b[dof::kZ]};
  }

  void add(PlanNode node) {
    pts_.insert(pts_.end(), node.q.flat().data(), node.q.flat().data() + dim_);
    res_.nodes.push_back(std::move(node));
  }

  SystemConfiguration sample() {
    const Aabb& b = checker_.environment().bounds;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto in = [&](double lo, double hi) { return lo + unit(rng_) * (hi - lo); };
    SystemConfiguration q = start_;
    if (p_.sampler == Sampler::Formation) {
      const Vec3 c(in(b.lo.x(), b.hi.x()), in(b.lo.y(), b.hi.y()), in(b.lo.z(), b.hi.z()));
      const double heading = in(-std::numbers::pi, std::numbers::pi);
      const Mat3 rot = yaw_rotation(heading);
      for (int i = 0; i < q.robots(); ++i) {
        const Vec3 p = c + rot * (base(start_, i) - centroid_);
        auto blk = q.block(i);
        blk[dof::kX] = p.x();
        blk[dof::kY] = p.y();
        blk[dof::kZ] = p.z();
        blk[dof::kYaw] = wrap_angle(blk[dof::kYaw] + heading);
      }
      return q;
    }
    const auto& lim = sys_.model().joint_limits;
    for (int i = 0; i < q.robots(); ++i) {
      auto blk = q.block(i);
      for (int d = 0; d < r_; ++d) {
        if (d <= dof::kZ) {
          blk[d] = in(b.lo[d], b.hi[d]);
        } else if (d == dof::kYaw) {
          blk[d] = in(-std::numbers::pi, std::numbers::pi);
        } else {
          blk[d] = in(lim[d].lo, lim[d].hi);
        }
      }
    }
    return q;
  }

  long nearest(const SystemConfiguration& target) {
    dist_.resize(res_.nodes.size());
    kernels::active().weighted_sq_dist(pts_.data(), res_.nodes.size(), dim_, target.flat().data(),
                                       weights_.data(), period_.data(), dist_.data());
    long best = 0;
    for (std::size_t k = 1; k < dist_.size(); ++k)
      if (dist_[k] < dist_[std::size_t(best)]) best = long(k);
    return best;
  }

  bool in_bounds(const SystemConfiguration& q) const {
    if (!within_joint_limits(sys_.model(), q)) return false;
    const Aabb& b = checker_.environment().bounds;
    for (int i = 0; i < q.robots(); ++i)
      if (!b.contains(base(q, i))) return false;
    return true;
  }

  bool edge_free(const SystemConfiguration& from, const SystemConfiguration& to) const {
    const Eigen::VectorXd diff = difference(from, to);
    const double len = configuration_metric(from, to, p_.metric);
    const long steps = std::max(1L, long(std::ceil(len / (p_.steer_step / 10.0))));
    for (long k = 1; k < steps; ++k) {
      if (checker_.check(advance(from, diff, double(k) / double(steps)), false).collision) return false;
    }
    return true;
  }

  // Steer from node `from` toward `target`, project and validate. Returns the
  // new node index or -1.
  long extend(long from, const SystemConfiguration& target) {
    const SystemConfiguration& q_near = res_.nodes[std::size_t(from)].q;
    const Eigen::VectorXd diff = difference(q_near, target);
    const double d = configuration_metric(q_near, target, p_.metric);
    if (d <= 0.0) return -1;
    SystemConfiguration q = advance(q_near, diff, std::min(1.0, p_.steer_step / d));

    std::vector<double> residual;
    if (p_.project) {
      ++res_.stats.projections_attempted;
      ProjectionReport rep = project(sys_, q, p_.projection);
      res_.stats.projection_updates += rep.updates;
      res_.stats.projection_time += rep.wall_time;
      if (!rep.converged()) {
        ++res_.stats.projection_failures;
        return -1;
      }
      ++res_.stats.projections_succeeded;
      q = std::move(rep.result);
      residual = std::move(rep.final_unweighted);
    } else {
      residual = sys_.evaluate(q);
      if (!sys_.satisfied(residual)) return -1;
    }
    if (!in_bounds(q)) {
      ++res_.stats.joint_limit_rejections;
      return -1;
    }
    const CollisionReport c = checker_.check(q);
    if (c.collision) {
      ++res_.stats.collision_rejections;
      return -1;
    }
    if (c.fit_rejected) {
      ++res_.stats.fit_rejections;
      return -1;
    }
    if (!edge_free(q_near, q)) {
      ++res_.stats.edge_rejections;
      return -1;
    }
    add({std::move(q), from, std::move(residual)});
    return long(res_.nodes.size()) - 1;
  }

  bool finish(long last) {
    res_.success = true;
    for (long k = last; k >= 0; k = res_.nodes[std::size_t(k)].parent) res_.path.push_back(k);
    std::reverse(res_.path.begin(), res_.path.end());
    return true;
  }

  // Greedy connection toward the goal from a node near it.
  bool try_goal(long node) {
    long cur = node;
    double d = configuration_metric(res_.nodes[std::size_t(cur)].q, goal_, p_.metric);
    if (d == 0.0) return finish(cur);
    if (d > 2.0 * p_.goal_tolerance) return false;
    ++res_.stats.goal_attempts;
    for (int attempt = 0; attempt < 4 && long(res_.nodes.size()) < p_.max_nodes; ++attempt) {
      if (d <= p_.steer_step) {
        if (edge_free(res_.nodes[std::size_t(cur)].q, goal_)) {
          add({goal_, cur, sys_.evaluate(goal_)});
          return finish(long(res_.nodes.size()) - 1);
        }
        break;
      }
      const long next = extend(cur, goal_);
      if (next < 0) break;
      cur = next;
      d = configuration_metric(res_.nodes[std::size_t(cur)].q, goal_, p_.metric);
    }
    if (d <= p_.goal_tolerance) return finish(cur);
    return false;
  }

  const ConstraintSystem& sys_;
  const CollisionChecker& checker_;
  const SystemConfiguration& start_;
  const SystemConfiguration& goal_;
  const PlannerParams& p_;
  std::mt19937_64 rng_;
  std::size_t dim_;
  int r_;
  std::vector<double> weights_, period_, pts_, dist_;
  Vec3 centroid_;
  PlanResult res_;
};

}  // namespace

PlanResult plan(const ConstraintSystem& sys, const CollisionChecker& checker,
                const SystemConfiguration& start, const SystemConfiguration& goal,
                const PlannerParams& params) {
  params.validate();
  sys.check_configuration(start);
  sys.check_configuration(goal);
  for (const auto* q : {&start, &goal}) {
    const NodeAudit a = audit_node(sys, checker, *q);
    const char* which = q == &start ? "start" : "goal";
    if (!a.constraints) throw StructuralError(std::string("plan: ") + which + " violates the constraints");
    if (!a.joint_limits) throw StructuralError(std::string("plan: ") + which + " is outside the joint limits or bounds");
    if (!a.collision_free) {
      const CollisionReport c = checker.check(*q);
      throw StructuralError(std::string("plan: ") + which + " is in collision (" +
                            (c.fit_rejected ? std::string("structure fit") : c.first + " / " + c.second) + ")");
    }
  }
  return Rrt(sys, checker, start, goal, params).run();
}

PlanResult plan(const Scenario& scenario, const PlannerParams& params) {
  const ConstraintSystem sys = scenario.system();
  const CollisionChecker checker(scenario);
  return plan(sys, checker, scenario.configuration_at(scenario.start),
              scenario.configuration_at(scenario.goal), params);
}

}  // namespace cnkz
