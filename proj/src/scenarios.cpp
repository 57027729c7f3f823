#include "cnkz/scenarios.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "cnkz/kernels.hpp"

namespace cnkz {

using nlohmann::json;

std::string to_string(Complexity c) {
  switch (c) {
    case Complexity::None: return "none";
    case Complexity::Low: return "low";
    case Complexity::Medium: return "medium";
    case Complexity::Hard: return "hard";
  }
  return "none";
}

Complexity complexity_from_string(const std::string& s) {
  for (auto c : {Complexity::None, Complexity::Low, Complexity::Medium, Complexity::Hard}) {
    if (to_string(c) == s) return c;
  }
  throw StructuralError("unknown complexity '" + s + "' (expected none, low, medium or hard)");
}

ClutterBand clutter_band(Complexity c) {
  switch (c) {
    case Complexity::None: return {0.0, 0.0};
    case Complexity::Low: return {0.05, 0.10};
    case Complexity::Medium: return {0.10, 0.20};
    case Complexity::Hard: return {0.20, 0.30};
  }
  return {};
}

double Environment::clutter_ratio() const {
  double v = 0.0;
  for (const auto& b : obstacles) v += b.volume();
  const double total = bounds.volume();
  return total > 0.0 ? v / total : 0.0;
}

bool Environment::operator==(const Environment& o) const {
  if (bounds.lo != o.bounds.lo || bounds.hi != o.bounds.hi || complexity != o.complexity ||
      seed != o.seed || obstacles.size() != o.obstacles.size()) {
    return false;
  }
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    if (obstacles[i].lo != o.obstacles[i].lo || obstacles[i].hi != o.obstacles[i].hi) return false;
  }
  return true;
}

Environment generate_environment(Complexity c, const Aabb& bounds, std::uint64_t seed,
                                 const std::vector<Aabb>& keep_clear,
                                 const EnvironmentParams& params) {
  if (!(params.min_side > 0.0) || params.max_side < params.min_side) {
    throw StructuralError("environment: need 0 < min_side <= max_side");
  }
  Environment env;
  env.bounds = bounds;
  env.complexity = c;
  env.seed = seed;
  const ClutterBand band = clutter_band(c);
  if (band.hi <= 0.0) return env;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double total = bounds.volume();
  const double target = band.lo + unit(rng) * (band.hi - band.lo);

  kernels::BoxSoA placed;
  std::vector<std::uint8_t> mask;
  double volume = 0.0;
  long attempts = 0;
  while (volume / total < target) {
    if (++attempts > params.max_attempts) {
      throw StructuralError("environment: could not reach clutter ratio " + std::to_string(target) +
                            " for class " + to_string(c) + " after " +
                            std::to_string(params.max_attempts) + " attempts");
    }
    Vec3 side, lo;
    for (int d = 0; d < 3; ++d) {
      const double extent = bounds.hi[d] - bounds.lo[d];
      side[d] = std::min(extent, params.min_side + unit(rng) * (params.max_side - params.min_side));
      lo[d] = bounds.lo[d] + unit(rng) * (extent - side[d]);
    }
    const Aabb box{lo, lo + side};
    if ((volume + box.volume()) / total >= band.hi) continue;
    bool blocked = false;
    for (const auto& k : keep_clear) blocked = blocked || box.overlaps(k);
    if (blocked) continue;
    mask.resize(placed.size());
    if (placed.size() > 0 &&
        kernels::active().aabb_overlaps(placed, box.lo.data(), box.hi.data(), mask.data()) > 0) {
      continue;
    }
    placed.push(box.lo.data(), box.hi.data());
    env.obstacles.push_back(box);
    volume += box.volume();
  }
  return env;
}

void Scenario::validate() const {
  model.validate();
  if (team < 1) throw StructuralError("scenario " + id + ": team must be >= 1");
  if (structure.contacts() != team) {
    throw StructuralError("scenario " + id + ": structure has " +
                          std::to_string(structure.contacts()) + " contact points for " +
                          std::to_string(team) + " robots");
  }
  const Aabb& b = environment.bounds;
  if (!((b.hi - b.lo).array() > 0.0).all()) {
    throw StructuralError("scenario " + id + ": environment bounds are empty");
  }
  for (std::size_t i = 0; i < environment.obstacles.size(); ++i) {
    const Aabb& o = environment.obstacles[i];
    if (!b.contains(o.lo) || !b.contains(o.hi) || !((o.hi - o.lo).array() >= 0.0).all()) {
      throw StructuralError("scenario " + id + ": obstacle " + std::to_string(i) +
                            " is not a box inside the bounds");
    }
  }
  system();  // manifold applicability
}

ConstraintSystem Scenario::system() const {
  return ConstraintSystem::assemble(manifolds, model, team, structure);
}

SystemConfiguration Scenario::configuration_at(const StructurePose& pose) const {
  SystemConfiguration q(team, model.dof());
  const Mat3 rot = yaw_rotation(pose.yaw);
  // End-effector height above the base center with the arm straight up.
  const double reach = model.arm_mount_offset.z() + model.link_lengths[0] + model.link_lengths[1];
  const Vec3 mount_xy = rot * Vec3(model.arm_mount_offset.x(), model.arm_mount_offset.y(), 0.0);
  for (int i = 0; i < team; ++i) {
    const Vec3 contact = pose.position + rot * structure.contact_points()[i];
    auto blk = q.block(i);
    blk[dof::kX] = contact.x() - mount_xy.x();
    blk[dof::kY] = contact.y() - mount_xy.y();
    blk[dof::kZ] = contact.z() - reach;
    blk[dof::kYaw] = wrap_angle(pose.yaw);
  }
  return q;
}

std::vector<Aabb> Scenario::keep_clear() const {
  std::vector<Aabb> out;
  const Vec3 pad = Vec3::Constant(keep_clear_margin) + model.base_half_extents;
  for (const StructurePose* pose : {&start, &goal}) {
    const SystemConfiguration q = configuration_at(*pose);
    Aabb box{Vec3::Constant(std::numeric_limits<double>::infinity()),
             Vec3::Constant(-std::numeric_limits<double>::infinity())};
    for (int i = 0; i < team; ++i) {
      const auto blk = q.block(i);
      const Vec3 base(blk[dof::kX], blk[dof::kY], blk[dof::kZ]);
      const Vec3 ee = forward_kinematics(model, blk).position;
      box.lo = box.lo.cwiseMin(base).cwiseMin(ee);
      box.hi = box.hi.cwiseMax(base).cwiseMax(ee);
    }
    box.lo -= pad;
    box.hi += pad;
    out.push_back(box);
  }
  return out;
}

Scenario Scenario::with_environment(Complexity c, std::uint64_t env_seed,
                                    const EnvironmentParams& params) const {
  Scenario s = *this;
  s.environment = generate_environment(c, environment.bounds, env_seed, keep_clear(), params);
  return s;
}

bool Scenario::operator==(const Scenario& o) const {
  if (model.joint_limits.size() != o.model.joint_limits.size()) return false;
  for (std::size_t i = 0; i < model.joint_limits.size(); ++i) {
    if (model.joint_limits[i].lo != o.model.joint_limits[i].lo ||
        model.joint_limits[i].hi != o.model.joint_limits[i].hi) {
      return false;
    }
  }
  return id == o.id && model.base_half_extents == o.model.base_half_extents &&
         model.link_lengths == o.model.link_lengths &&
         model.arm_mount_offset == o.model.arm_mount_offset &&
         model.with_velocity == o.model.with_velocity && model.link_radius == o.model.link_radius &&
         team == o.team && structure == o.structure && manifolds == o.manifolds &&
         environment == o.environment && start == o.start && goal == o.goal && seed == o.seed &&
         keep_clear_margin == o.keep_clear_margin;
}

// ---------------------------------------------------------------------------
// Reference scenarios

const std::vector<std::string>& reference_ids() {
  static const std::vector<std::string> ids{"T_3", "S_3", "S_4", "I_5", "S_5", "S_6"};
  return ids;
}

namespace {

std::vector<ManifoldSpec> specs(std::initializer_list<ManifoldKind> kinds) {
  std::vector<ManifoldSpec> out;
  for (auto k : kinds) out.push_back(ManifoldSpec::defaults(k));
  return out;
}

}  // namespace

Scenario reference_scenario(const std::string& id) {
  using K = ManifoldKind;
  Scenario s;
  s.id = id;
  s.start = {Vec3(3.0, 3.0, 0.7), 0.0};
  s.goal = {Vec3(17.0, 17.0, 0.7), 0.0};
  if (id.size() == 3 && id[0] == 'S' && id[1] == '_' && id[2] >= '3' && id[2] <= '6') {
    s.team = id[2] - '0';
    s.structure = make_structure(StructureKind::Straight, 0.5 * (s.team - 1), 0.5);
    s.manifolds = specs({K::StructureFixedDistance, K::StructureFixedAngle, K::TaskFixedOrient,
                         K::TaskSamePlane});
  } else if (id == "T_3") {
    s.team = 3;
    s.structure = make_structure(StructureKind::T);
    s.manifolds = specs({K::StructureFixedDistance, K::TaskFixedOrient, K::TaskSamePlane});
  } else if (id == "I_5") {
    s.team = 5;
    s.structure = make_structure(StructureKind::I);
    s.manifolds = specs({K::StructureFixedDistance, K::StructureFixedAngle, K::TaskFixedOrient,
                         K::TaskSamePlane});
    s.manifolds[2].orient = OrientFamily::Neighbor;
  } else {
    throw StructuralError("unknown reference scenario '" + id + "'");
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

constexpr const char* kScenarioSchema = "cnkz.scenario/1";

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw SchemaError(where + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where + "." + key, "missing");
  return *it;
}

template <typename T>
T get(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    fail(where, std::string("wrong type (") + j.type_name() + ")");
  }
}

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
  return get<T>(field(j, key, where), where + "." + key);
}

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(where, "expected [x, y, z]");
  return {get<double>(j[0], where + "[0]"), get<double>(j[1], where + "[1]"),
          get<double>(j[2], where + "[2]")};
}

json bound(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double bound_from(const json& j, double unbounded, const std::string& where) {
  return j.is_null() ? unbounded : get<double>(j, where);
}

json box_json(const Aabb& b) { return {{"lo", vec(b.lo)}, {"hi", vec(b.hi)}}; }

Aabb box_from(const json& j, const std::string& where) {
  return {vec_from(field(j, "lo", where), where + ".lo"), vec_from(field(j, "hi", where), where + ".hi")};
}

json obb_json(const Obb& b) {
  json axes = json::array();
  for (int c = 0; c < 3; ++c) axes.push_back(vec(b.axes.col(c)));
  return {{"center", vec(b.center)}, {"half", vec(b.half)}, {"axes", axes}};
}

Obb obb_from(const json& j, const std::string& where) {
  Obb b;
  b.center = vec_from(field(j, "center", where), where + ".center");
  b.half = vec_from(field(j, "half", where), where + ".half");
  if (j.contains("axes")) {
    const json& axes = j["axes"];
    if (!axes.is_array() || axes.size() != 3) fail(where + ".axes", "expected three axis vectors");
    for (int c = 0; c < 3; ++c) b.axes.col(c) = vec_from(axes[c], where + ".axes[" + std::to_string(c) + "]");
  }
  return b;
}

json model_json(const RobotModel& m) {
  json limits = json::array();
  for (const auto& l : m.joint_limits) limits.push_back(json::array({bound(l.lo), bound(l.hi)}));
  return {{"base_half_extents", vec(m.base_half_extents)},
          {"link_lengths", json::array({m.link_lengths[0], m.link_lengths[1]})},
          {"arm_mount_offset", vec(m.arm_mount_offset)},
          {"link_radius", m.link_radius},
          {"with_velocity", m.with_velocity},
          {"joint_limits", limits}};
}

RobotModel model_from(const json& j, const std::string& where) {
  RobotModel m = RobotModel::make_default(j.contains("with_velocity") &&
                                          get<bool>(j["with_velocity"], where + ".with_velocity"));
  if (j.contains("base_half_extents")) {
    m.base_half_extents = vec_from(j["base_half_extents"], where + ".base_half_extents");
  }
  if (j.contains("link_lengths")) {
    const auto ll = get<std::vector<double>>(j["link_lengths"], where + ".link_lengths");
    if (ll.size() != 2) fail(where + ".link_lengths", "expected two lengths");
    m.link_lengths = {ll[0], ll[1]};
  }
  if (j.contains("arm_mount_offset")) {
    m.arm_mount_offset = vec_from(j["arm_mount_offset"], where + ".arm_mount_offset");
  }
  if (j.contains("link_radius")) m.link_radius = get<double>(j["link_radius"], where + ".link_radius");
  if (j.contains("joint_limits")) {
    const json& lim = j["joint_limits"];
    const std::string w = where + ".joint_limits";
    if (!lim.is_array()) fail(w, "expected an array");
    m.joint_limits.clear();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lim.size(); ++i) {
      const std::string wi = w + "[" + std::to_string(i) + "]";
      if (!lim[i].is_array() || lim[i].size() != 2) fail(wi, "expected [lo, hi]");
      m.joint_limits.push_back({bound_from(lim[i][0], -kInf, wi + "[0]"),
                                bound_from(lim[i][1], kInf, wi + "[1]")});
    }
  }
  try {
    m.validate();
  } catch (const StructuralError& e) {
    fail(where, e.what());
  }
  return m;
}

json structure_json(const Structure& s) {
  json pts = json::array(), boxes = json::array();
  for (const auto& p : s.contact_points()) pts.push_back(vec(p));
  for (const auto& b : s.boxes()) boxes.push_back(obb_json(b));
  return {{"kind", to_string(s.kind())},
          {"length", s.length()},
          {"spacing", s.spacing()},
          {"contacts", pts},
          {"boxes", boxes}};
}

Structure structure_from(const json& j, const std::string& where) {
  StructureKind kind;
  try {
    kind = structure_kind_from_string(get<std::string>(j, "kind", where));
  } catch (const SchemaError&) {
    throw;
  } catch (const StructuralError& e) {
    fail(where + ".kind", e.what());
  }
  const double length = j.contains("length") ? get<double>(j["length"], where + ".length") : 1.0;
  const double spacing = j.contains("spacing") ? get<double>(j["spacing"], where + ".spacing") : 0.5;
  try {
    if (!j.contains("contacts")) {
      if (kind == StructureKind::Custom) fail(where + ".contacts", "required for custom structures");
      return make_structure(kind, length, spacing);
    }
    std::vector<Vec3> pts;
    const json& cj = j["contacts"];
    if (!cj.is_array()) fail(where + ".contacts", "expected an array");
    for (std::size_t i = 0; i < cj.size(); ++i) {
      pts.push_back(vec_from(cj[i], where + ".contacts[" + std::to_string(i) + "]"));
    }
    std::vector<Obb> boxes;
    if (j.contains("boxes")) {
      const json& bj = j["boxes"];
      if (!bj.is_array()) fail(where + ".boxes", "expected an array");
      for (std::size_t i = 0; i < bj.size(); ++i) {
        boxes.push_back(obb_from(bj[i], where + ".boxes[" + std::to_string(i) + "]"));
      }
    }
    return Structure(kind, std::move(pts), std::move(boxes), length, spacing);
  } catch (const SchemaError&) {
    throw;
  } catch (const StructuralError& e) {
    fail(where, e.what());
  }
}

json manifold_json(const ManifoldSpec& m) {
  json j{{"kind", short_name(m.kind)}, {"threshold", m.threshold}, {"weight", m.weight}};
  switch (m.kind) {
    case ManifoldKind::StructureFixedDistance: j["pairs"] = to_string(m.pairs); break;
    case ManifoldKind::StructureFixedAngle: j["triples"] = to_string(m.triples); break;
    case ManifoldKind::TaskFixedOrient: j["orient"] = to_string(m.orient); break;
    case ManifoldKind::TaskSamePlane:
      j["pairs"] = to_string(m.pairs);
      j["plane_normal"] = vec(m.plane_normal);
      break;
    case ManifoldKind::RobotDiffDrive: break;
  }
  return j;
}

ManifoldSpec manifold_from(const json& j, const std::string& where) {
  try {
    ManifoldSpec m = ManifoldSpec::defaults(
        manifold_kind_from_string(get<std::string>(j, "kind", where)));
    if (j.contains("threshold")) m.threshold = get<double>(j["threshold"], where + ".threshold");
    if (j.contains("weight")) m.weight = get<double>(j["weight"], where + ".weight");
    if (j.contains("pairs")) m.pairs = pair_family_from_string(get<std::string>(j["pairs"], where + ".pairs"));
    if (j.contains("triples")) {
      m.triples = triple_family_from_string(get<std::string>(j["triples"], where + ".triples"));
    }
    if (j.contains("orient")) {
      m.orient = orient_family_from_string(get<std::string>(j["orient"], where + ".orient"));
    }
    if (j.contains("plane_normal")) m.plane_normal = vec_from(j["plane_normal"], where + ".plane_normal");
    if (!(m.threshold >= 0.0)) fail(where + ".threshold", "must be >= 0");
    if (!(m.weight > 0.0)) fail(where + ".weight", "must be > 0");
    return m;
  } catch (const SchemaError&) {
    throw;
  } catch (const StructuralError& e) {
    fail(where, e.what());
  }
}

json pose_json(const StructurePose& p) { return {{"position", vec(p.position)}, {"yaw", p.yaw}}; }

StructurePose pose_from(const json& j, const std::string& where) {
  return {vec_from(field(j, "position", where), where + ".position"),
          j.contains("yaw") ? get<double>(j["yaw"], where + ".yaw") : 0.0};
}

}  // namespace

json to_json(const Scenario& s) {
  json manifolds = json::array(), obstacles = json::array();
  for (const auto& m : s.manifolds) manifolds.push_back(manifold_json(m));
  for (const auto& o : s.environment.obstacles) obstacles.push_back(box_json(o));
  return {{"schema", kScenarioSchema},
          {"id", s.id},
          {"seed", s.seed},
          {"team", s.team},
          {"robot", model_json(s.model)},
          {"structure", structure_json(s.structure)},
          {"manifolds", manifolds},
          {"environment",
           {{"bounds", box_json(s.environment.bounds)},
            {"complexity", to_string(s.environment.complexity)},
            {"seed", s.environment.seed},
            {"obstacles", obstacles}}},
          {"keep_clear_margin", s.keep_clear_margin},
          {"start", pose_json(s.start)},
          {"goal", pose_json(s.goal)}};
}

Scenario scenario_from_json(const json& j) {
  const std::string root = "scenario";
  const auto schema = get<std::string>(j, "schema", root);
  if (schema != kScenarioSchema) {
    fail(root + ".schema", "unsupported schema '" + schema + "' (expected " + kScenarioSchema + ")");
  }
  Scenario s;
  s.id = get<std::string>(j, "id", root);
  if (j.contains("seed")) s.seed = get<std::uint64_t>(j["seed"], root + ".seed");
  s.team = get<int>(j, "team", root);
  if (j.contains("robot")) s.model = model_from(j["robot"], root + ".robot");
  s.structure = structure_from(field(j, "structure", root), root + ".structure");

  const json& mj = field(j, "manifolds", root);
  if (!mj.is_array()) fail(root + ".manifolds", "expected an array");
  for (std::size_t i = 0; i < mj.size(); ++i) {
    s.manifolds.push_back(manifold_from(mj[i], root + ".manifolds[" + std::to_string(i) + "]"));
  }

  if (j.contains("environment")) {
    const json& ej = j["environment"];
    const std::string w = root + ".environment";
    if (ej.contains("bounds")) s.environment.bounds = box_from(ej["bounds"], w + ".bounds");
    if (ej.contains("complexity")) {
      try {
        s.environment.complexity = complexity_from_string(get<std::string>(ej["complexity"], w + ".complexity"));
      } catch (const SchemaError&) {
        throw;
      } catch (const StructuralError& e) {
        fail(w + ".complexity", e.what());
      }
    }
    if (ej.contains("seed")) s.environment.seed = get<std::uint64_t>(ej["seed"], w + ".seed");
    if (ej.contains("obstacles")) {
      const json& oj = ej["obstacles"];
      if (!oj.is_array()) fail(w + ".obstacles", "expected an array");
      for (std::size_t i = 0; i < oj.size(); ++i) {
        s.environment.obstacles.push_back(box_from(oj[i], w + ".obstacles[" + std::to_string(i) + "]"));
      }
    }
  }
  if (j.contains("keep_clear_margin")) {
    s.keep_clear_margin = get<double>(j["keep_clear_margin"], root + ".keep_clear_margin");
  }
  s.start = pose_from(field(j, "start", root), root + ".start");
  s.goal = pose_from(field(j, "goal", root), root + ".goal");
  try {
    s.validate();
  } catch (const SchemaError&) {
    throw;
  } catch (const StructuralError& e) {
    fail(root, e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path.string() + ": cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError(path.string() + ": cannot write");
  out << to_json(s).dump(2) << '\n';
}

json to_json(const SystemConfiguration& q) {
  json robots = json::array();
  for (int i = 0; i < q.robots(); ++i) {
    const auto b = q.block(i);
    json r{{"x", b[dof::kX]}, {"y", b[dof::kY]}, {"z", b[dof::kZ]}, {"yaw", b[dof::kYaw]},
           {"arm", json::array({b[dof::kArm1], b[dof::kArm2]})}};
    if (q.dof_per_robot() == dof::kWithVelocity) {
      r["velocity"] = json::array({b[dof::kVelX], b[dof::kVelY]});
    }
    robots.push_back(r);
  }
  return robots;
}

SystemConfiguration configuration_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of robots");
  std::vector<RobotConfiguration> robots;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    RobotConfiguration rc;
    rc.x = get<double>(j[i], "x", w);
    rc.y = get<double>(j[i], "y", w);
    rc.z = get<double>(j[i], "z", w);
    rc.yaw = get<double>(j[i], "yaw", w);
    const auto arm = get<std::vector<double>>(j[i], "arm", w);
    if (arm.size() != 2) fail(w + ".arm", "expected two joint angles");
    rc.arm = {arm[0], arm[1]};
    if (j[i].contains("velocity")) {
      const auto v = get<std::vector<double>>(j[i]["velocity"], w + ".velocity");
      if (v.size() != 2) fail(w + ".velocity", "expected [vx, vy]");
      rc.velocity = std::array<double, 2>{v[0], v[1]};
    }
    robots.push_back(rc);
  }
  try {
    return SystemConfiguration::from_robots(robots);
  } catch (const StructuralError& e) {
    fail(where, e.what());
  }
}

}  // namespace cnkz
