#pragma once

// Benchmark harness for the two experiment families:
//   projection  random team configurations projected by each solver, per
//               (manifold set, solver, threshold scale) cell
//   planning    one constrained RRT per seeded environment, per
//               (scenario, complexity, solver) cell
// Trials run on a bounded worker pool; every trial is keyed by its own seed and
// written to its own slot, so results do not depend on scheduling. Trials with
// the same index share their seed across solvers (paired comparisons).
//
// CSV schemas (header row included):
//   projection_trials.csv  set,method,threshold_scale,trial,seed,status,success,steps,updates,
//                          residual_evaluations,gradient_evaluations,diverged,initial_norm,
//                          final_norm,m1_mean,m2_mean,m3_mean,m4_mean,m5_mean,time_s,reason
//   projection_cells.csv   set,method,threshold_scale,rows,trials,successes,success_rate,
//                          updates_mean,updates_std,residual_evaluations_mean,m1_mean,m2_mean,
//                          m3_mean,m4_mean,m5_mean,time_mean_s,time_std_s
//   planning_trials.csv    scenario,complexity,method,trial,env_seed,planner_seed,clutter_ratio,
//                          success,nodes,path_nodes,extensions,projections_attempted,
//                          projections_succeeded,projection_success_rate,projection_updates,
//                          updates_per_projection,audit_violations,plan_time_s,
//                          time_per_projection_s,reason
//   planning_cells.csv     scenario,complexity,method,dof,rows,trials,successes,success_rate,
//                          projection_success_rate_mean,updates_per_projection_mean,
//                          updates_per_projection_std,audit_violations,plan_time_mean_s,
//                          plan_time_std_s,time_per_projection_mean_s,time_per_projection_std_s
// m<k>_mean is the mean absolute unweighted residual of manifold M<k> (empty when absent;
// cell values average successful trials only). Standard deviations use n - 1 (0 for n < 2).
// Columns ending in _s are timings and are excluded from determinism checks.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cnkz/planner.hpp"
#include "cnkz/scenarios.hpp"
#include "cnkz/solvers.hpp"

namespace cnkz {

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t index);

/// Sample mean and (n - 1) standard deviation.
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
  long n = 0;
};
MeanStd mean_std(const std::vector<double>& v);

/// Runs fn(0..count-1) on up to `jobs` threads (jobs <= 1 runs inline).
void parallel_for(long count, int jobs, const std::function<void(long)>& fn);

// ---------------------------------------------------------------------------
// Projection experiment

struct ManifoldSet {
  std::string label;  // "M1,M3"
  std::vector<ManifoldSpec> specs;
};

/// {M1,M3}, {M3,M4}, {M1,M2,M3}, {M1,M2,M3,M4} with their row families.
std::vector<ManifoldSet> projection_sets();
ManifoldSet projection_set(const std::string& label);

struct ProjectionBenchSpec {
  std::vector<ManifoldSet> sets = projection_sets();
  std::vector<Method> solvers{Method::CNKZ, Method::NKZ, Method::NR, Method::CIM};
  std::vector<double> threshold_scales{1.0};
  long trials = 200;
  std::uint64_t seed = 1;
  Structure structure = make_structure(StructureKind::Straight, 1.0, 0.5);
  RobotModel model = RobotModel::make_default();
  Aabb bounds{Vec3::Zero(), Vec3::Constant(20.0)};
  std::optional<double> spread;  // unset: bases uniform in bounds; set: per-axis offset from the contacts
  SolverParams solver;       // method is overridden per cell
  long trace_trials = 0;     // record residual traces for the first k trials of a cell
  int jobs = 1;

  void validate() const;
};

/// Bases uniform in bounds, or (with `spread`) offset by up to `spread` per axis
/// from their contacts on a structure at a random pose. Yaw and arm angles are
/// uniform within limits either way.
SystemConfiguration sample_projection_start(const ProjectionBenchSpec& spec, int team,
                                            std::uint64_t seed);

struct ProjectionTrial {
  std::string set;
  Method method = Method::CNKZ;
  double threshold_scale = 1.0;
  long trial = 0;
  std::uint64_t seed = 0;
  std::string status;  // Converged / BudgetExhausted / SingularStall / Error
  bool success = false;
  long steps = 0, updates = 0, residual_evaluations = 0, gradient_evaluations = 0;
  bool diverged = false;
  double initial_norm = 0.0, final_norm = 0.0;
  std::array<std::optional<double>, 5> manifold_mean{};
  double time_s = 0.0;
  std::string reason;
};

struct ProjectionCell {
  std::string set;
  Method method = Method::CNKZ;
  double threshold_scale = 1.0;
  std::size_t rows = 0;
  long trials = 0, successes = 0;
  double success_rate = 0.0;  // percent
  MeanStd updates, residual_evaluations, time_s;
  std::array<std::optional<double>, 5> manifold_mean{};
};

struct TraceRecord {
  std::string set;
  Method method = Method::CNKZ;
  double threshold_scale = 1.0;
  long trial = 0;
  std::string csv;  // solver trace CSV
};

struct ProjectionBenchResult {
  std::vector<ProjectionTrial> trials;
  std::vector<ProjectionCell> cells;
  std::vector<TraceRecord> traces;
  nlohmann::json metadata;
};

ProjectionBenchResult run_projection_benchmark(const ProjectionBenchSpec& spec);
std::vector<ProjectionCell> aggregate(const std::vector<ProjectionTrial>& trials,
                                      const std::vector<std::size_t>& rows_per_set = {},
                                      const std::vector<std::string>& set_order = {});

// ---------------------------------------------------------------------------
// Planning experiment

struct PlanningBenchSpec {
  std::vector<Scenario> scenarios;
  std::vector<Complexity> complexities{Complexity::Low, Complexity::Medium, Complexity::Hard};
  std::vector<Method> solvers{Method::CNKZ, Method::NKZ};
  long trials = 20;
  std::uint64_t seed = 1;
  PlannerParams planner;  // projection.method is overridden per cell
  EnvironmentParams environment;
  std::filesystem::path path_dir;  // export successful paths here when non-empty
  int jobs = 1;

  void validate() const;
};

struct PlanningTrial {
  std::string scenario;
  Complexity complexity = Complexity::None;
  Method method = Method::CNKZ;
  long trial = 0;
  std::uint64_t env_seed = 0, planner_seed = 0;
  double clutter_ratio = 0.0;
  bool success = false;
  long nodes = 0, path_nodes = 0, extensions = 0;
  long projections_attempted = 0, projections_succeeded = 0, projection_updates = 0;
  double projection_success_rate = 0.0;
  double updates_per_projection = 0.0;
  long audit_violations = 0;
  double plan_time_s = 0.0, time_per_projection_s = 0.0;
  std::string reason;
};

struct PlanningCell {
  std::string scenario;
  Complexity complexity = Complexity::None;
  Method method = Method::CNKZ;
  std::size_t dof = 0, rows = 0;
  long trials = 0, successes = 0;
  double success_rate = 0.0;
  double projection_success_rate_mean = 0.0;
  MeanStd updates_per_projection, plan_time_s, time_per_projection_s;
  long audit_violations = 0;
};

struct PlanningBenchResult {
  std::vector<PlanningTrial> trials;
  std::vector<PlanningCell> cells;
  nlohmann::json metadata;
};

PlanningBenchResult run_planning_benchmark(const PlanningBenchSpec& spec);
std::vector<PlanningCell> aggregate(const std::vector<PlanningTrial>& trials,
                                    const std::vector<Scenario>& scenarios = {});

/// Count of path nodes failing the independent audit.
long audit_path(const Scenario& s, const std::vector<SystemConfiguration>& waypoints);

// ---------------------------------------------------------------------------
// CSV

void write_csv(const std::vector<ProjectionTrial>& trials, std::ostream& out);
void write_csv(const std::vector<ProjectionCell>& cells, std::ostream& out);
void write_csv(const std::vector<PlanningTrial>& trials, std::ostream& out);
void write_csv(const std::vector<PlanningCell>& cells, std::ostream& out);

std::vector<ProjectionTrial> read_projection_trials(std::istream& in);
std::vector<PlanningTrial> read_planning_trials(std::istream& in);

/// Writes the CSVs, <experiment>_metadata.json and traces/ under `dir`.
void write_outputs(const ProjectionBenchResult& r, const std::filesystem::path& dir);
void write_outputs(const PlanningBenchResult& r, const std::filesystem::path& dir);

nlohmann::json machine_metadata(int jobs);

}  // namespace cnkz
