#include "cnkz/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cnkz {

std::string to_string(ManifoldKind k) {
  switch (k) {
    case ManifoldKind::StructureFixedDistance: return "StructureFixedDistance";
    case ManifoldKind::StructureFixedAngle: return "StructureFixedAngle";
    case ManifoldKind::TaskFixedOrient: return "TaskFixedOrient";
    case ManifoldKind::TaskSamePlane: return "TaskSamePlane";
    case ManifoldKind::RobotDiffDrive: return "RobotDiffDrive";
  }
  return "?";
}

std::string short_name(ManifoldKind k) {
  return "M" + std::to_string(static_cast<int>(k) + 1);
}

ManifoldKind manifold_kind_from_string(const std::string& s) {
  for (int i = 0; i < 5; ++i) {
    const auto k = static_cast<ManifoldKind>(i);
    if (s == to_string(k) || s == short_name(k)) return k;
  }
  throw StructuralError("unknown manifold kind '" + s + "'");
}

std::string to_string(PairFamily f) { return f == PairFamily::AllPairs ? "all_pairs" : "chain"; }

std::string to_string(TripleFamily f) {
  switch (f) {
    case TripleFamily::ChainAnchored: return "chain_anchored";
    case TripleFamily::VertexCentered: return "vertex_centered";
    case TripleFamily::AllOrdered: return "all_ordered";
  }
  return "?";
}

std::string to_string(OrientFamily f) {
  switch (f) {
    case OrientFamily::AllOthers: return "all_others";
    case OrientFamily::Neighbor: return "neighbor";
    case OrientFamily::OrderedTriples: return "ordered_triples";
  }
  return "?";
}

PairFamily pair_family_from_string(const std::string& s) {
  if (s == "all_pairs") return PairFamily::AllPairs;
  if (s == "chain") return PairFamily::Chain;
  throw StructuralError("unknown pair family '" + s + "'");
}

TripleFamily triple_family_from_string(const std::string& s) {
  for (auto f : {TripleFamily::ChainAnchored, TripleFamily::VertexCentered, TripleFamily::AllOrdered}) {
    if (s == to_string(f)) return f;
  }
  throw StructuralError("unknown triple family '" + s + "'");
}

OrientFamily orient_family_from_string(const std::string& s) {
  for (auto f : {OrientFamily::AllOthers, OrientFamily::Neighbor, OrientFamily::OrderedTriples}) {
    if (s == to_string(f)) return f;
  }
  throw StructuralError("unknown orientation family '" + s + "'");
}

ManifoldSpec ManifoldSpec::defaults(ManifoldKind kind) {
  ManifoldSpec s;
  s.kind = kind;
  switch (kind) {
    case ManifoldKind::StructureFixedDistance: s.threshold = 5e-3; break;
    case ManifoldKind::StructureFixedAngle: s.threshold = 1e-3; break;
    case ManifoldKind::TaskFixedOrient: s.threshold = 1e-2; break;
    case ManifoldKind::TaskSamePlane: s.threshold = 5e-3; break;
    case ManifoldKind::RobotDiffDrive: s.threshold = 1e-3; break;
  }
  return s;
}

namespace {

constexpr double kSingular = 1e-12;

std::vector<std::array<int, 2>> pairs_of(PairFamily f, int n) {
  std::vector<std::array<int, 2>> out;
  if (f == PairFamily::Chain) {
    for (int i = 0; i + 1 < n; ++i) out.push_back({i, i + 1});
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) out.push_back({i, j});
  }
  return out;
}

std::vector<std::array<int, 3>> triples_of(TripleFamily f, int n) {
  std::vector<std::array<int, 3>> out;
  switch (f) {
    case TripleFamily::ChainAnchored:
      for (int i = 0; i + 1 < n; ++i)
        for (int k = 0; k < n; ++k)
          if (k != i && k != i + 1) out.push_back({i, i + 1, k});
      break;
    case TripleFamily::VertexCentered:
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          for (int k = i + 1; k < n; ++k)
            if (i != j && k != j) out.push_back({i, j, k});
      break;
    case TripleFamily::AllOrdered:
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            if (i != j && j != k && i != k) out.push_back({i, j, k});
      break;
  }
  return out;
}

std::vector<std::array<int, 3>> orient_rows_of(OrientFamily f, int n) {
  std::vector<std::array<int, 3>> out;
  switch (f) {
    case OrientFamily::AllOthers:
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
          if (j != k) out.push_back({k, j, k});
      break;
    case OrientFamily::Neighbor:
      for (int k = 0; k < n; ++k) out.push_back({k, k + 1 < n ? k + 1 : k - 1, k});
      break;
    case OrientFamily::OrderedTriples:
      for (const auto& t : triples_of(TripleFamily::AllOrdered, n)) out.push_back(t);
      break;
  }
  return out;
}

// d unit(a) / da applied to v: (v - (â·v) â) / ‖a‖
inline Vec3 unit_grad(const Vec3& a_hat, double a_norm, const Vec3& v) {
  return (v - a_hat.dot(v) * a_hat) / a_norm;
}

}  // namespace

ConstraintSystem ConstraintSystem::assemble(std::vector<ManifoldSpec> specs,
                                            const RobotModel& model, int team,
                                            const Structure& structure) {
  model.validate();
  if (team < 1) throw StructuralError("team size must be at least 1");
  if (structure.contacts() != team) {
    throw StructuralError("structure has " + std::to_string(structure.contacts()) +
                          " contact points but the team has " + std::to_string(team) + " robots");
  }
  ConstraintSystem sys;
  sys.model_ = model;
  sys.structure_ = structure;
  sys.team_ = team;

  for (std::size_t m = 0; m < specs.size(); ++m) {
    const ManifoldSpec& spec = specs[m];
    const std::string where = "manifold " + std::to_string(m) + " (" + short_name(spec.kind) + ")";
    if (!(spec.threshold >= 0.0)) throw StructuralError(where + ": threshold must be >= 0");
    if (!(spec.weight > 0.0)) throw StructuralError(where + ": weight must be > 0");

    ManifoldBlock block{spec, sys.rows_.size(), 0};
    auto push = [&](RowType type, std::array<int, 3> robots, double target) {
      Row r;
      r.type = type;
      r.manifold = static_cast<int>(m);
      r.local = static_cast<int>(block.rows++);
      r.robots = robots;
      r.target = target;
      sys.rows_.push_back(r);
    };

    switch (spec.kind) {
      case ManifoldKind::StructureFixedDistance:
        if (team < 2) throw StructuralError(where + ": needs at least two robots");
        for (auto [i, j] : pairs_of(spec.pairs, team))
          push(RowType::Distance, {i, j, -1}, structure.distance(i, j));
        break;
      case ManifoldKind::StructureFixedAngle:
        if (team < 3) throw StructuralError(where + ": angular constraints need at least three robots");
        for (auto [i, j, k] : triples_of(spec.triples, team)) {
          const TripleEntry& e = structure.triple(i, j, k);
          if (e.collinear) push(RowType::AngleCross, {i, j, k}, 0.0);
          else push(RowType::AngleDot, {i, j, k}, e.cosine);
        }
        break;
      case ManifoldKind::TaskFixedOrient:
        if (team < 2) throw StructuralError(where + ": needs at least two robots");
        if (spec.orient == OrientFamily::OrderedTriples && team < 3) {
          throw StructuralError(where + ": ordered triples need at least three robots");
        }
        for (auto t : orient_rows_of(spec.orient, team)) push(RowType::Orient, t, 0.0);
        break;
      case ManifoldKind::TaskSamePlane:
        if (team < 2) throw StructuralError(where + ": needs at least two robots");
        if (!(spec.plane_normal.norm() > 0.0)) throw StructuralError(where + ": zero plane normal");
        for (auto [i, j] : pairs_of(spec.pairs, team)) push(RowType::Plane, {i, j, -1}, 0.0);
        break;
      case ManifoldKind::RobotDiffDrive:
        if (!model.with_velocity) {
          throw StructuralError(where + ": configuration carries no velocity DoFs");
        }
        for (int i = 0; i < team; ++i) push(RowType::DiffDrive, {i, -1, -1}, 0.0);
        break;
    }
    for (std::size_t r = 0; r < block.rows; ++r) {
      sys.thresholds_.push_back(spec.threshold);
      sys.weights_.push_back(spec.weight);
    }
    sys.blocks_.push_back(block);
  }
  return sys;
}

double ConstraintSystem::min_threshold() const {
  double t = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks_) t = std::min(t, b.spec.threshold);
  return std::isfinite(t) ? t : 0.0;
}

void ConstraintSystem::check_configuration(const SystemConfiguration& q) const {
  if (q.robots() != team_ || q.dof_per_robot() != model_.dof()) {
    throw StructuralError("configuration has " + std::to_string(q.robots()) + "x" +
                          std::to_string(q.dof_per_robot()) + " DoFs, system expects " +
                          std::to_string(team_) + "x" + std::to_string(model_.dof()));
  }
}

double ConstraintSystem::row_value(std::size_t k, const EndEffector* ee,
                                   std::span<const double> q) const {
  const int r = model_.dof();
  const Row& row = rows_[k];
  const auto [a, b, c] = row.robots;
  double v = 0.0;
  switch (row.type) {
    case RowType::Distance:
      v = std::abs((ee[a].position - ee[b].position).norm() - row.target);
      break;
    case RowType::AngleDot:
    case RowType::AngleCross: {
      const Vec3 u = ee[a].position - ee[b].position;
      const Vec3 w = ee[b].position - ee[c].position;
      const double nu = u.norm(), nw = w.norm();
      if (nu < kSingular || nw < kSingular) {
        v = row.type == RowType::AngleDot ? -row.target : 0.0;
      } else if (row.type == RowType::AngleDot) {
        v = (u / nu).dot(w / nw) - row.target;
      } else {
        v = (u / nu).cross(w / nw).norm();
      }
      break;
    }
    case RowType::Orient: {
      const Vec3 u = ee[a].position - ee[b].position;
      const double nu = u.norm();
      v = nu < kSingular ? 0.0 : (u / nu).dot(ee[c].orientation);
      break;
    }
    case RowType::Plane:
      v = blocks_[row.manifold].spec.plane_normal.dot(ee[a].position - ee[b].position);
      break;
    case RowType::DiffDrive: {
      const auto blk = q.subspan(a * r, r);
      v = blk[dof::kVelX] * std::sin(blk[dof::kYaw]) - blk[dof::kVelY] * std::cos(blk[dof::kYaw]);
      break;
    }
  }
  return v;
}

void ConstraintSystem::evaluate(std::span<const double> q, std::span<double> out) const {
  const int r = model_.dof();
  std::array<EndEffector, 16> small;
  std::vector<EndEffector> large;
  EndEffector* ee = small.data();
  if (team_ > int(small.size())) {
    large.resize(team_);
    ee = large.data();
  }
  for (int i = 0; i < team_; ++i) ee[i] = forward_kinematics(model_, q.subspan(i * r, r));
  for (std::size_t k = 0; k < rows_.size(); ++k) out[k] = row_value(k, ee, q);
}

void ConstraintSystem::evaluate_moved(std::span<const double> q,
                                      std::span<const std::uint8_t> moved,
                                      std::span<double> out) const {
  const int r = model_.dof();
  auto touched = [&](const Row& row) {
    for (int robot : row.robots)
      if (robot >= 0 && moved[robot]) return true;
    return false;
  };
  std::vector<std::uint8_t> need(team_, 0);
  for (const Row& row : rows_) {
    if (!touched(row)) continue;
    for (int robot : row.robots)
      if (robot >= 0) need[robot] = 1;
  }
  std::vector<EndEffector> ee(team_);
  for (int i = 0; i < team_; ++i)
    if (need[i]) ee[i] = forward_kinematics(model_, q.subspan(i * r, r));
  for (std::size_t k = 0; k < rows_.size(); ++k)
    if (touched(rows_[k])) out[k] = row_value(k, ee.data(), q);
}

std::vector<double> ConstraintSystem::evaluate(const SystemConfiguration& q) const {
  check_configuration(q);
  std::vector<double> out(rows_.size());
  evaluate(q.span(), out);
  return out;
}

std::vector<double> ConstraintSystem::residual(const SystemConfiguration& q) const {
  std::vector<double> r = evaluate(q);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = -weights_[i] * r[i];
  return r;
}

bool ConstraintSystem::satisfied(std::span<const double> unweighted) const {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (!row_satisfied(i, unweighted[i])) return false;
  }
  return true;
}

bool ConstraintSystem::gradient(std::span<const double> q, std::size_t row_index,
                                std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const Row& row = rows_.at(row_index);
  const int r = model_.dof();
  const double w = weights_[row_index];
  const auto [a, b, c] = row.robots;

  // Accumulate dF/dp_k and dF/do_k through each robot's FK Jacobian.
  auto add = [&](int robot, const Vec3& dpos, const Vec3& dori) {
    const auto blk = q.subspan(robot * r, r);
    const FkJacobian j = fk_jacobian(model_, blk);
    for (int d = 0; d < r; ++d) {
      out[robot * r + d] += w * (dpos.dot(j.block<3, 1>(0, d)) + dori.dot(j.block<3, 1>(3, d)));
    }
  };
  auto pos = [&](int robot) { return forward_kinematics(model_, q.subspan(robot * r, r)); };

  switch (row.type) {
    case RowType::Distance: {
      const Vec3 u = pos(a).position - pos(b).position;
      const double nu = u.norm();
      if (nu < kSingular) return false;
      // Subgradient of |d - L| at d == L taken from the signed branch.
      const double sign = nu - row.target < 0.0 ? -1.0 : 1.0;
      const Vec3 g = sign * u / nu;
      add(a, g, Vec3::Zero());
      add(b, -g, Vec3::Zero());
      return true;
    }
    case RowType::AngleDot:
    case RowType::AngleCross: {
      const Vec3 pa = pos(a).position, pb = pos(b).position, pc = pos(c).position;
      const Vec3 u = pa - pb, v = pb - pc;
      const double nu = u.norm(), nv = v.norm();
      if (nu < kSingular || nv < kSingular) return false;
      const Vec3 uh = u / nu, vh = v / nv;
      Vec3 gu, gv;
      if (row.type == RowType::AngleDot) {
        gu = unit_grad(uh, nu, vh);
        gv = unit_grad(vh, nv, uh);
      } else {
        const Vec3 cr = uh.cross(vh);
        const double nc = cr.norm();
        if (nc < kSingular) return false;
        const Vec3 ch = cr / nc;
        gu = unit_grad(uh, nu, vh.cross(ch));
        gv = unit_grad(vh, nv, ch.cross(uh));
      }
      add(a, gu, Vec3::Zero());
      add(b, gv - gu, Vec3::Zero());
      add(c, -gv, Vec3::Zero());
      return true;
    }
    case RowType::Orient: {
      const Vec3 u = pos(a).position - pos(b).position;
      const double nu = u.norm();
      if (nu < kSingular) return false;
      const Vec3 uh = u / nu;
      const Vec3 gu = unit_grad(uh, nu, pos(c).orientation);
      add(a, gu, Vec3::Zero());
      add(b, -gu, Vec3::Zero());
      add(c, Vec3::Zero(), uh);
      return true;
    }
    case RowType::Plane: {
      const Vec3& n = blocks_[row.manifold].spec.plane_normal;
      add(a, n, Vec3::Zero());
      add(b, -n, Vec3::Zero());
      return true;
    }
    case RowType::DiffDrive: {
      const auto blk = q.subspan(a * r, r);
      const double s = std::sin(blk[dof::kYaw]), co = std::cos(blk[dof::kYaw]);
      out[a * r + dof::kYaw] = w * (blk[dof::kVelX] * co + blk[dof::kVelY] * s);
      out[a * r + dof::kVelX] = w * s;
      out[a * r + dof::kVelY] = -w * co;
      return true;
    }
  }
  return false;
}

std::vector<double> manifold_residuals(const ManifoldSpec& spec, const RobotModel& model,
                                       const Structure& structure, const SystemConfiguration& q) {
  return ConstraintSystem::assemble({spec}, model, q.robots(), structure).evaluate(q);
}

}  // namespace cnkz
