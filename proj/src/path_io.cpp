#include "cnkz/path_io.hpp"

#include <fstream>

namespace cnkz {

using nlohmann::json;

namespace {

constexpr const char* kPathSchema = "cnkz.path/1";

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw SchemaError(where + ": " + what);
}

template <typename T>
T get(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    fail(where + "." + key, std::string("wrong type (") + it->type_name() + ")");
  }
}

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where + "." + key, "missing");
  return *it;
}

}  // namespace

json to_json(const SolverParams& p) {
  json j{{"method", to_string(p.method)},
         {"max_cycles", p.max_cycles},
         {"nr_step_scale", p.nr_step_scale},
         {"nr_singular_cutoff", p.nr_singular_cutoff},
         {"nr_divergence", p.nr_divergence},
         {"cim_relaxation", p.cim_relaxation},
         {"rng_seed", p.rng_seed},
         {"randomized_order", p.randomized_order},
         {"fast_mode", p.fast_mode},
         {"residual_mode", to_string(p.residual_mode)}};
  j["global_threshold"] = p.global_threshold ? json(*p.global_threshold) : json(nullptr);
  return j;
}

SolverParams solver_params_from_json(const json& j, const std::string& where) {
  SolverParams p;
  try {
    p.method = method_from_string(get<std::string>(j, "method", where, to_string(p.method)));
  } catch (const SchemaError&) {
    throw;
  } catch (const StructuralError& e) {
    fail(where + ".method", e.what());
  }
  p.max_cycles = get<long>(j, "max_cycles", where, p.max_cycles);
  p.nr_step_scale = get<double>(j, "nr_step_scale", where, p.nr_step_scale);
  p.nr_singular_cutoff = get<double>(j, "nr_singular_cutoff", where, p.nr_singular_cutoff);
  p.nr_divergence = get<double>(j, "nr_divergence", where, p.nr_divergence);
  p.cim_relaxation = get<double>(j, "cim_relaxation", where, p.cim_relaxation);
  p.rng_seed = get<std::uint64_t>(j, "rng_seed", where, p.rng_seed);
  p.randomized_order = get<bool>(j, "randomized_order", where, p.randomized_order);
  p.fast_mode = get<bool>(j, "fast_mode", where, p.fast_mode);
  if (j.contains("residual_mode")) {
    const auto m = get<std::string>(j, "residual_mode", where, "iterate");
    try {
      p.residual_mode = residual_mode_from_string(m);
    } catch (const StructuralError& e) {
      fail(where + ".residual_mode", e.what());
    }
  }
  if (j.contains("global_threshold") && !j["global_threshold"].is_null()) {
    p.global_threshold = get<double>(j, "global_threshold", where, 0.0);
  }
  try {
    p.validate();
  } catch (const StructuralError& e) {
    fail(where, e.what());
  }
  return p;
}

json to_json(const PlannerParams& p) {
  return {{"max_nodes", p.max_nodes},
          {"max_extensions", p.max_extensions},
          {"steer_step", p.steer_step},
          {"goal_bias", p.goal_bias},
          {"goal_tolerance", p.goal_tolerance},
          {"project", p.project},
          {"sampler", to_string(p.sampler)},
          {"metric",
           {{"position", p.metric.position},
            {"yaw", p.metric.yaw},
            {"arm", p.metric.arm},
            {"velocity", p.metric.velocity}}},
          {"rng_seed", p.rng_seed},
          {"projection", to_json(p.projection)}};
}

PlannerParams planner_params_from_json(const json& j, const std::string& where) {
  PlannerParams p;
  p.max_nodes = get<long>(j, "max_nodes", where, p.max_nodes);
  p.max_extensions = get<long>(j, "max_extensions", where, p.max_extensions);
  p.steer_step = get<double>(j, "steer_step", where, p.steer_step);
  p.goal_bias = get<double>(j, "goal_bias", where, p.goal_bias);
  p.goal_tolerance = get<double>(j, "goal_tolerance", where, p.goal_tolerance);
  p.project = get<bool>(j, "project", where, p.project);
  try {
    p.sampler = sampler_from_string(get<std::string>(j, "sampler", where, to_string(p.sampler)));
  } catch (const SchemaError&) {
    throw;
  } catch (const StructuralError& e) {
    fail(where + ".sampler", e.what());
  }
  if (j.contains("metric")) {
    const json& m = j["metric"];
    const std::string w = where + ".metric";
    p.metric.position = get<double>(m, "position", w, p.metric.position);
    p.metric.yaw = get<double>(m, "yaw", w, p.metric.yaw);
    p.metric.arm = get<double>(m, "arm", w, p.metric.arm);
    p.metric.velocity = get<double>(m, "velocity", w, p.metric.velocity);
  }
  p.rng_seed = get<std::uint64_t>(j, "rng_seed", where, p.rng_seed);
  if (j.contains("projection")) p.projection = solver_params_from_json(j["projection"], where + ".projection");
  try {
    p.validate();
  } catch (const SchemaError&) {
    throw;
  } catch (const StructuralError& e) {
    fail(where, e.what());
  }
  return p;
}

json to_json(const PlanStats& s) {
  return {{"extensions", s.extensions},
          {"projections_attempted", s.projections_attempted},
          {"projections_succeeded", s.projections_succeeded},
          {"projection_updates", s.projection_updates},
          {"projection_failures", s.projection_failures},
          {"joint_limit_rejections", s.joint_limit_rejections},
          {"collision_rejections", s.collision_rejections},
          {"edge_rejections", s.edge_rejections},
          {"fit_rejections", s.fit_rejections},
          {"goal_attempts", s.goal_attempts},
          {"projection_time_s", std::chrono::duration<double>(s.projection_time).count()},
          {"wall_time_s", std::chrono::duration<double>(s.wall_time).count()}};
}

json to_json(const ConstraintSystem& sys, const ProjectionReport& r, bool timing) {
  json manifolds = json::array();
  for (const auto& m : r.per_manifold) {
    manifolds.push_back({{"kind", short_name(m.kind)}, {"max_abs", m.max_abs}, {"mean_abs", m.mean_abs}});
  }
  json j{{"schema", "cnkz.projection/1"},
         {"status", to_string(r.status)},
         {"method", to_string(r.method)},
         {"rows", sys.rows()},
         {"dof", sys.dof()},
         {"steps_used", r.steps_used},
         {"updates", r.updates},
         {"residual_evaluations", r.residual_evaluations},
         {"gradient_evaluations", r.gradient_evaluations},
         {"diverged", r.diverged},
         {"initial_norm", r.initial_norm},
         {"final_norm", r.final_norm},
         {"per_manifold", manifolds},
         {"final_unweighted", r.final_unweighted},
         {"result", to_json(r.result)}};
  if (timing) j["wall_time_s"] = std::chrono::duration<double>(r.wall_time).count();
  return j;
}

json path_to_json(const Scenario& s, const PlanResult& r, const PlannerParams& p) {
  if (!r.success) throw StructuralError("path export: the plan did not reach the goal");
  json waypoints = json::array();
  for (std::size_t k = 0; k < r.path.size(); ++k) {
    const PlanNode& n = r.nodes[std::size_t(r.path[k])];
    waypoints.push_back({{"index", k}, {"robots", to_json(n.q)}, {"residuals", n.residual}});
  }
  return {{"schema", kPathSchema},
          {"scenario_id", s.id},
          {"seed", p.rng_seed},
          {"scenario", to_json(s)},
          {"params", to_json(p)},
          {"waypoints", waypoints},
          {"stats", to_json(r.stats)}};
}

PathFile path_from_json(const json& j) {
  const std::string root = "path";
  const auto schema = get<std::string>(j, "schema", root, "");
  if (schema != kPathSchema) {
    fail(root + ".schema", "unsupported schema '" + schema + "' (expected " + kPathSchema + ")");
  }
  PathFile f;
  f.scenario = scenario_from_json(need(j, "scenario", root));
  if (j.contains("params")) f.params = planner_params_from_json(j["params"], root + ".params");
  const json& wj = need(j, "waypoints", root);
  if (!wj.is_array() || wj.empty()) fail(root + ".waypoints", "expected a non-empty array");
  const int dof = f.scenario.model.dof();
  for (std::size_t k = 0; k < wj.size(); ++k) {
    const std::string w = root + ".waypoints[" + std::to_string(k) + "]";
    SystemConfiguration q = configuration_from_json(need(wj[k], "robots", w), w + ".robots");
    if (q.robots() != f.scenario.team || q.dof_per_robot() != dof) {
      fail(w + ".robots", "does not match the scenario's team");
    }
    f.waypoints.push_back(std::move(q));
    f.residuals.push_back(get<std::vector<double>>(wj[k], "residuals", w, {}));
  }
  if (j.contains("stats")) f.stats = j["stats"];
  return f;
}

void export_path(const Scenario& s, const PlanResult& r, const PlannerParams& p,
                 const std::filesystem::path& file) {
  const json j = path_to_json(s, r, p);
  std::ofstream out(file);
  if (!out) throw SchemaError(file.string() + ": cannot write");
  out << j.dump(2) << '\n';
}

PathFile import_path(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw SchemaError(file.string() + ": cannot open");
  try {
    return path_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw SchemaError(file.string() + ": " + e.what());
  }
}

}  // namespace cnkz
