// cnkz command line front end.
//
// Exit codes
//   0  success (projection converged, plan found, command completed)
//   1  projection budget exhausted, or no plan within the node budget
//   2  usage error (unknown flag, out-of-range value)
//   3  projection stalled on singular rows
//   4  I/O or file schema error
//
// Relative output paths are resolved against $CNKZ_OUTPUT_DIR when it is set.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <map>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "cnkz/bench.hpp"
#include "cnkz/path_io.hpp"
#include "cnkz/planner.hpp"
#include "cnkz/scenarios.hpp"
#include "cnkz/summarize.hpp"
#include "cnkz/svg.hpp"

namespace fs = std::filesystem;
using namespace cnkz;

namespace {

enum Exit { kOk = 0, kFailed = 1, kUsage = 2, kStall = 3, kIo = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path output_path(const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) {
    if (const char* dir = std::getenv("CNKZ_OUTPUT_DIR"); dir && *dir) path = fs::path(dir) / path;
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  return path;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw SchemaError(p.string() + ": cannot write");
  out << text;
}

struct ScenarioFlags {
  std::string file;
  std::string reference = "S_3";

  void add(CLI::App* app) {
    app->add_option("-s,--scenario", file, "Scenario file (cnkz.scenario/1)");
    app->add_option("-r,--reference", reference, "Built-in scenario: T_3, S_3, S_4, I_5, S_5, S_6")
        ->capture_default_str();
  }
  Scenario load() const {
    if (!file.empty()) return load_scenario(file);
    try {
      return reference_scenario(reference);
    } catch (const StructuralError& e) {
      throw UsageError(e.what());
    }
  }
};

struct SolverFlags {
  std::string method = "cNKZ";
  long max_cycles = 2000;
  double global_threshold = -1.0;
  double nr_step_scale = 1.0;
  double cim_relaxation = 1.0;
  bool randomized = false;
  bool fast = false;
  std::string residual = "iterate";

  void add(CLI::App* app) {
    app->add_option("-m,--method", method, "cNKZ, NKZ, NR or CIM")->capture_default_str();
    app->add_option("--max-cycles", max_cycles, "Budget in full row cycles (NR/CIM: iterations)")->capture_default_str();
    app->add_option("--global-threshold", global_threshold,
                    "Threshold for NKZ/NR/CIM (default: strictest manifold threshold)");
    app->add_option("--nr-step-scale", nr_step_scale, "Newton damping in (0, 1]")->capture_default_str();
    app->add_option("--cim-relaxation", cim_relaxation, "Cimmino relaxation in (0, 2)")->capture_default_str();
    app->add_flag("--randomized-order", randomized, "Random Kaczmarz row order");
    app->add_flag("--fast", fast, "Recompute only rows touched by each update");
    app->add_option("--residual-mode", residual,
                    "Kaczmarz residual after a rejected step: stale, revert or iterate")
        ->capture_default_str();
  }
  SolverParams params(std::uint64_t seed) const {
    SolverParams p;
    try {
      p.method = method_from_string(method);
    } catch (const StructuralError& e) {
      throw UsageError(e.what());
    }
    p.max_cycles = max_cycles;
    if (global_threshold >= 0.0) p.global_threshold = global_threshold;
    p.nr_step_scale = nr_step_scale;
    p.cim_relaxation = cim_relaxation;
    p.randomized_order = randomized;
    p.fast_mode = fast;
    try {
      p.residual_mode = residual_mode_from_string(residual);
    } catch (const StructuralError& e) {
      throw UsageError(e.what());
    }
    p.rng_seed = seed;
    try {
      p.validate();
    } catch (const StructuralError& e) {
      throw UsageError(e.what());
    }
    return p;
  }
};

struct PlannerFlags {
  long max_nodes = 5000;
  long max_extensions = 0;
  double steer = 0.3;
  double goal_bias = 0.1;
  double goal_tolerance = 0.2;
  std::string sampler = "formation";
  bool no_project = false;

  void add(CLI::App* app) {
    app->add_option("--max-nodes", max_nodes, "Tree size budget")->capture_default_str();
    app->add_option("--max-extensions", max_extensions, "Sampling budget (0: 50 x max-nodes)")
        ->capture_default_str();
    app->add_option("--steer", steer, "Steering step in the configuration metric")->capture_default_str();
    app->add_option("--goal-bias", goal_bias, "Goal sampling probability")->capture_default_str();
    app->add_option("--goal-tolerance", goal_tolerance, "Goal radius in the configuration metric")
        ->capture_default_str();
    app->add_option("--sampler", sampler, "formation or uniform")->capture_default_str();
    app->add_flag("--no-project", no_project, "Plain RRT without projection");
  }
  PlannerParams params(const SolverParams& solver, std::uint64_t seed) const {
    PlannerParams p;
    p.max_nodes = max_nodes;
    p.max_extensions = max_extensions;
    p.steer_step = steer;
    p.goal_bias = goal_bias;
    p.goal_tolerance = goal_tolerance;
    p.project = !no_project;
    p.projection = solver;
    p.rng_seed = seed;
    try {
      p.sampler = sampler_from_string(sampler);
      p.validate();
    } catch (const StructuralError& e) {
      throw UsageError(e.what());
    }
    return p;
  }
};

Complexity parse_complexity(const std::string& s) {
  try {
    return complexity_from_string(s);
  } catch (const StructuralError& e) {
    throw UsageError(e.what());
  }
}

int cmd_project(const ScenarioFlags& sf, const SolverFlags& solver, const std::string& config,
                std::uint64_t seed, std::optional<double> spread, const std::string& report_out,
                const std::string& trace_out, int verbosity) {
  const Scenario s = sf.load();
  const ConstraintSystem sys = s.system();
  SystemConfiguration q0;
  if (!config.empty()) {
    std::ifstream in(config);
    if (!in) throw SchemaError(config + ": cannot open");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(config + ": " + e.what());
    }
    q0 = configuration_from_json(j.is_object() && j.contains("robots") ? j["robots"] : j, "config");
    sys.check_configuration(q0);
  } else {
    ProjectionBenchSpec spec;
    spec.model = s.model;
    spec.structure = s.structure;
    spec.bounds = s.environment.bounds;
    spec.spread = spread;
    q0 = sample_projection_start(spec, s.team, seed);
  }
  SolverParams p = solver.params(seed);
  p.record_trace = !trace_out.empty();
  const ProjectionReport r = project(sys, q0, p);

  const nlohmann::json j = to_json(sys, r);
  if (!report_out.empty()) {
    write_text(output_path(report_out), j.dump(2) + "\n");
  }
  if (!trace_out.empty()) {
    std::ofstream out(output_path(trace_out));
    if (!out) throw SchemaError(trace_out + ": cannot write");
    write_trace_csv(sys, r, out);
  }
  if (verbosity > 0 || report_out.empty()) {
    std::cout << fmt::format("{} {} rows={} steps={} updates={} norm {:.3e} -> {:.3e}\n",
                             to_string(r.method), to_string(r.status), sys.rows(), r.steps_used,
                             r.updates, r.initial_norm, r.final_norm);
  }
  switch (r.status) {
    case ProjectionStatus::Converged: return kOk;
    case ProjectionStatus::BudgetExhausted: return kFailed;
    case ProjectionStatus::SingularStall: return kStall;
  }
  return kFailed;
}

int cmd_plan(const ScenarioFlags& sf, const SolverFlags& solver, const PlannerFlags& pf,
             const std::string& complexity, std::uint64_t env_seed, std::uint64_t seed,
             const std::string& out, const std::string& svg, int verbosity) {
  Scenario s = sf.load();
  if (!complexity.empty()) s = s.with_environment(parse_complexity(complexity), env_seed);
  const PlannerParams p = pf.params(solver.params(seed), seed);
  const PlanResult r = plan(s, p);
  std::cout << fmt::format("{} nodes={} path={} extensions={} projections={}/{} time={:.2f}s\n",
                           r.success ? "success" : "failure", r.nodes.size(), r.path.size(),
                           r.stats.extensions, r.stats.projections_succeeded,
                           r.stats.projections_attempted,
                           std::chrono::duration<double>(r.stats.wall_time).count());
  if (verbosity > 0) std::cout << to_json(r.stats).dump(2) << '\n';
  if (r.success) {
    if (!out.empty()) export_path(s, r, p, output_path(out));
    if (!svg.empty()) {
      std::ofstream o(output_path(svg));
      if (!o) throw SchemaError(svg + ": cannot write");
      const auto w = r.waypoints();
      write_path_svg(s, w, o, std::max<int>(1, int(w.size()) / 10));
    }
  }
  return r.success ? kOk : kFailed;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) {
    try {
      out.push_back(method_from_string(n));
    } catch (const StructuralError& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained Kaczmarz projection and multi-robot planning toolkit"};
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "More output");

  ScenarioFlags project_scn, plan_scn, env_scn;
  SolverFlags project_solver, plan_solver, bench_solver;
  PlannerFlags plan_flags, bench_planner;

  // project
  std::string config, report_out, trace_out;
  std::uint64_t project_seed = 1;
  std::optional<double> spread;
  auto* project_cmd = app.add_subcommand("project", "Project one configuration onto the constraint manifolds");
  project_scn.add(project_cmd);
  project_solver.add(project_cmd);
  project_cmd->add_option("-c,--config", config, "Start configuration (JSON array of robots); random when omitted");
  project_cmd->add_option("--seed", project_seed, "Seed for the random start and solver")->capture_default_str();
  project_cmd->add_option("--spread", spread,
                           "Random start: per-axis base offset from the contacts (default: bases uniform in bounds)");
  project_cmd->add_option("-o,--report", report_out, "Report JSON output");
  project_cmd->add_option("--trace", trace_out, "Residual trace CSV output");

  // plan
  std::string plan_complexity, plan_out, plan_svg;
  std::uint64_t plan_seed = 1, plan_env_seed = 1;
  auto* plan_cmd = app.add_subcommand("plan", "Plan a constrained path from the start to the goal pose");
  plan_scn.add(plan_cmd);
  plan_solver.add(plan_cmd);
  plan_flags.add(plan_cmd);
  plan_cmd->add_option("--complexity", plan_complexity, "Generate an environment: none, low, medium, hard");
  plan_cmd->add_option("--env-seed", plan_env_seed, "Environment seed")->capture_default_str();
  plan_cmd->add_option("--seed", plan_seed, "Planner seed")->capture_default_str();
  plan_cmd->add_option("-o,--out", plan_out, "Path JSON output");
  plan_cmd->add_option("--svg", plan_svg, "Top-down SVG output");

  // bench
  std::string experiment = "projection", bench_out = "bench";
  std::optional<long> bench_trials;
  std::optional<double> bench_spread;
  long trace_trials = 1;
  std::uint64_t bench_seed = 1;
  int jobs = 1;
  std::vector<std::string> bench_methods, bench_sets, bench_scenarios, bench_complexities;
  std::vector<double> scales{1.0};
  bool export_paths = false;
  auto* bench_cmd = app.add_subcommand("bench", "Run the projection or planning benchmark");
  bench_cmd->add_option("experiment", experiment, "projection or planning")
      ->check(CLI::IsMember({"projection", "planning"}))
      ->capture_default_str();
  bench_cmd->add_option("--trials", bench_trials, "Trials per cell (default 200 projection, 20 planning)");
  bench_cmd->add_option("--seed", bench_seed, "Base seed")->capture_default_str();
  bench_cmd->add_option("-j,--jobs", jobs, "Concurrent trials")->capture_default_str()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--solvers", bench_methods, "Solvers (default all four / cNKZ NKZ)");
  bench_cmd->add_option("--sets", bench_sets, "Manifold sets: M1+M3 M3+M4 M1+M2+M3 M1+M2+M3+M4");
  bench_cmd->add_option("--spread", bench_spread,
                         "Projection starts: per-axis base offset from the contacts (default: uniform in bounds)");
  bench_cmd->add_option("--scales", scales, "Threshold scales")->capture_default_str();
  bench_cmd->add_option("--trace-trials", trace_trials, "Trials per cell with residual traces")
      ->capture_default_str();
  bench_cmd->add_option("--scenarios", bench_scenarios, "Scenario ids or files (default all references)");
  bench_cmd->add_option("--complexities", bench_complexities, "none low medium hard (default low medium hard)");
  bench_cmd->add_flag("--export-paths", export_paths, "Write successful paths under <out>/paths");
  bench_cmd->add_option("-o,--out", bench_out, "Output directory")->capture_default_str();
  bench_planner.add(bench_cmd);
  bench_solver.add(bench_cmd);

  // gen-env
  std::string env_complexity = "low", env_out = "environment.json";
  std::uint64_t env_seed = 1;
  auto* env_cmd = app.add_subcommand("gen-env", "Generate a cluttered environment into a scenario file");
  env_scn.add(env_cmd);
  env_cmd->add_option("--complexity", env_complexity, "none, low, medium or hard")->capture_default_str();
  env_cmd->add_option("--seed", env_seed, "Environment seed")->capture_default_str();
  env_cmd->add_option("-o,--out", env_out, "Scenario JSON output")->capture_default_str();

  // render
  std::string render_path, render_svg, render_bench, render_out = "summary";
  auto* render_cmd = app.add_subcommand("render", "Render a path to SVG or summarize benchmark outputs");
  render_cmd->add_option("--path", render_path, "Path JSON to render");
  render_cmd->add_option("--svg", render_svg, "SVG output for --path");
  render_cmd->add_option("--bench-dir", render_bench, "Benchmark output directory to summarize");
  render_cmd->add_option("-o,--out", render_out, "Summary output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*project_cmd) {
      return cmd_project(project_scn, project_solver, config, project_seed, spread, report_out,
                         trace_out, verbosity);
    }
    if (*plan_cmd) {
      return cmd_plan(plan_scn, plan_solver, plan_flags, plan_complexity, plan_env_seed, plan_seed,
                      plan_out, plan_svg, verbosity);
    }
    if (*bench_cmd) {
      const fs::path dir = output_path(bench_out + "/");
      if (experiment == "projection") {
        ProjectionBenchSpec spec;
        spec.trials = bench_trials.value_or(200);
        spec.seed = bench_seed;
        spec.jobs = jobs;
        spec.threshold_scales = scales;
        spec.trace_trials = trace_trials;
        spec.spread = bench_spread;
        spec.solver = bench_solver.params(bench_seed);
        if (!bench_methods.empty()) spec.solvers = parse_methods(bench_methods);
        if (!bench_sets.empty()) {
          spec.sets.clear();
          for (const auto& label : bench_sets) {
            try {
              spec.sets.push_back(projection_set(label));
            } catch (const StructuralError& e) {
              throw UsageError(e.what());
            }
          }
        }
        try {
          spec.validate();
        } catch (const StructuralError& e) {
          throw UsageError(e.what());
        }
        const auto r = run_projection_benchmark(spec);
        write_outputs(r, dir);
        std::cout << render_projection_table(r.cells);
      } else {
        PlanningBenchSpec spec;
        spec.trials = bench_trials.value_or(20);
        spec.seed = bench_seed;
        spec.jobs = jobs;
        spec.planner = bench_planner.params(bench_solver.params(bench_seed), bench_seed);
        if (!bench_methods.empty()) spec.solvers = parse_methods(bench_methods);
        if (bench_scenarios.empty()) bench_scenarios = reference_ids();
        for (const auto& id : bench_scenarios) {
          if (fs::exists(id)) {
            spec.scenarios.push_back(load_scenario(id));
          } else {
            try {
              spec.scenarios.push_back(reference_scenario(id));
            } catch (const StructuralError& e) {
              throw UsageError(e.what());
            }
          }
        }
        if (!bench_complexities.empty()) {
          spec.complexities.clear();
          for (const auto& c : bench_complexities) spec.complexities.push_back(parse_complexity(c));
        }
        if (export_paths) spec.path_dir = dir / "paths";
        try {
          spec.validate();
        } catch (const StructuralError& e) {
          throw UsageError(e.what());
        }
        const auto r = run_planning_benchmark(spec);
        write_outputs(r, dir);
        std::cout << render_planning_table(r.cells);
      }
      return kOk;
    }
    if (*env_cmd) {
      const Scenario s = env_scn.load().with_environment(parse_complexity(env_complexity), env_seed);
      save_scenario(s, output_path(env_out));
      std::cout << fmt::format("{} obstacles, clutter ratio {:.4f}\n", s.environment.obstacles.size(),
                               s.environment.clutter_ratio());
      return kOk;
    }
    if (*render_cmd) {
      if (render_path.empty() == render_bench.empty()) {
        throw UsageError("render: give exactly one of --path or --bench-dir");
      }
      if (!render_path.empty()) {
        const PathFile f = import_path(render_path);
        const fs::path svg = output_path(render_svg.empty() ? fs::path(render_path).stem().string() + ".svg"
                                                            : render_svg);
        std::ofstream o(svg);
        if (!o) throw SchemaError(svg.string() + ": cannot write");
        write_path_svg(f.scenario, f.waypoints, o, std::max<int>(1, int(f.waypoints.size()) / 10));
        std::cout << svg.string() << '\n';
      } else {
        for (const auto& p : summarize_directory(render_bench, output_path(render_out + "/"))) {
          std::cout << p.string() << '\n';
        }
      }
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const StructuralError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
