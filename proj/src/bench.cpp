#include "cnkz/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "cnkz/kernels.hpp"
#include "cnkz/path_io.hpp"

namespace cnkz {

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(base) ^ index);
}

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd m;
  m.n = long(v.size());
  if (v.empty()) return m;
  double s = 0.0;
  for (double x : v) s += x;
  m.mean = s / double(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / double(v.size() - 1));
  }
  return m;
}

void parallel_for(long count, int jobs, const std::function<void(long)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (long i = next++; i < count && !failed; i = next++) {
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min<long>(jobs, count); ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

nlohmann::json machine_metadata(int jobs) {
  nlohmann::json bands = nlohmann::json::object();
  for (auto c : {Complexity::Low, Complexity::Medium, Complexity::Hard}) {
    bands[to_string(c)] = {clutter_band(c).lo, clutter_band(c).hi};
  }
  return {{"hardware_threads", std::thread::hardware_concurrency()},
          {"jobs", jobs},
          {"kernels", std::string(kernels::isa_name(kernels::active_isa()))},
#if defined(__VERSION__)
          {"compiler", __VERSION__},
#endif
          {"clutter_bands", bands}};
}

// ---------------------------------------------------------------------------
// Projection experiment

std::vector<ManifoldSet> projection_sets() {
  using K = ManifoldKind;
  auto d = ManifoldSpec::defaults;
  ManifoldSpec m1 = d(K::StructureFixedDistance), m2 = d(K::StructureFixedAngle),
               m3 = d(K::TaskFixedOrient), m4 = d(K::TaskSamePlane);
  ManifoldSpec m3_neighbor = m3, m4_chain = m4, m2_vertex = m2;
  m3_neighbor.orient = OrientFamily::Neighbor;
  m4_chain.pairs = PairFamily::Chain;
  m2_vertex.triples = TripleFamily::VertexCentered;
  return {{"M1+M3", {m1, m3_neighbor}},
          {"M3+M4", {m3, m4_chain}},
          {"M1+M2+M3", {m1, m2_vertex, m3}},
          {"M1+M2+M3+M4", {m1, m2, m3, m4}}};
}

ManifoldSet projection_set(const std::string& label) {
  for (auto& s : projection_sets()) {
    if (s.label == label) return s;
  }
  throw StructuralError("unknown manifold set '" + label +
                        "' (expected M1+M3, M3+M4, M1+M2+M3 or M1+M2+M3+M4)");
}

void ProjectionBenchSpec::validate() const {
  if (trials < 1) throw StructuralError("bench: trials must be >= 1");
  if (solvers.empty()) throw StructuralError("bench: no solvers selected");
  if (threshold_scales.empty()) throw StructuralError("bench: no threshold scales");
  for (double s : threshold_scales) {
    if (!(s > 0.0)) throw StructuralError("bench: threshold scales must be > 0");
  }
  if (spread && !(*spread >= 0.0)) throw StructuralError("bench: spread must be >= 0");
  if (jobs < 1) throw StructuralError("bench: jobs must be >= 1");
  solver.validate();
}

SystemConfiguration sample_projection_start(const ProjectionBenchSpec& spec, int team,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto in = [&](double lo, double hi) { return lo + unit(rng) * (hi - lo); };
  Scenario s;
  s.model = spec.model;
  s.team = team;
  s.structure = spec.structure;
  const Vec3 margin = Vec3::Constant(2.0).cwiseMin(0.25 * (spec.bounds.hi - spec.bounds.lo));
  StructurePose pose;
  for (int d = 0; d < 3; ++d) pose.position[d] = in(spec.bounds.lo[d] + margin[d], spec.bounds.hi[d] - margin[d]);
  pose.yaw = in(-std::numbers::pi, std::numbers::pi);
  SystemConfiguration q = s.configuration_at(pose);
  const auto& lim = spec.model.joint_limits;
  for (int i = 0; i < team; ++i) {
    auto b = q.block(i);
    for (int d = dof::kX; d <= dof::kZ; ++d) {
      b[d] = spec.spread ? b[d] + in(-*spec.spread, *spec.spread) : in(spec.bounds.lo[d], spec.bounds.hi[d]);
    }
    b[dof::kYaw] = in(-std::numbers::pi, std::numbers::pi);
    b[dof::kArm1] = in(lim[dof::kArm1].lo, lim[dof::kArm1].hi);
    b[dof::kArm2] = in(lim[dof::kArm2].lo, lim[dof::kArm2].hi);
    if (spec.model.with_velocity) {
      b[dof::kVelX] = in(lim[dof::kVelX].lo, lim[dof::kVelX].hi);
      b[dof::kVelY] = in(lim[dof::kVelY].lo, lim[dof::kVelY].hi);
    }
  }
  return q;
}

namespace {

int manifold_index(ManifoldKind k) { return static_cast<int>(k); }

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

ProjectionBenchResult run_projection_benchmark(const ProjectionBenchSpec& spec) {
  spec.validate();
  const int team = spec.structure.contacts();

  struct Cell {
    const ManifoldSet* set;
    Method method;
    double scale;
    std::optional<ConstraintSystem> sys;
    std::string error;
  };
  std::vector<Cell> cells;
  std::vector<std::size_t> rows_per_cell;
  for (const auto& set : spec.sets) {
    for (double scale : spec.threshold_scales) {
      for (Method m : spec.solvers) {
        Cell c{&set, m, scale, std::nullopt, {}};
        std::vector<ManifoldSpec> specs = set.specs;
        for (auto& ms : specs) ms.threshold *= scale;
        try {
          c.sys = ConstraintSystem::assemble(specs, spec.model, team, spec.structure);
        } catch (const StructuralError& e) {
          c.error = e.what();
        }
        cells.push_back(std::move(c));
      }
    }
  }

  std::vector<SystemConfiguration> starts(std::size_t(spec.trials));
  for (long t = 0; t < spec.trials; ++t) {
    starts[std::size_t(t)] = sample_projection_start(spec, team, trial_seed(spec.seed, std::uint64_t(t)));
  }

  ProjectionBenchResult res;
  res.trials.resize(cells.size() * std::size_t(spec.trials));
  std::vector<std::optional<TraceRecord>> traces(res.trials.size());
  parallel_for(long(res.trials.size()), spec.jobs, [&](long k) {
    const Cell& c = cells[std::size_t(k) / std::size_t(spec.trials)];
    const long t = k % spec.trials;
    ProjectionTrial& tr = res.trials[std::size_t(k)];
    tr.set = c.set->label;
    tr.method = c.method;
    tr.threshold_scale = c.scale;
    tr.trial = t;
    tr.seed = trial_seed(spec.seed, std::uint64_t(t));
    if (!c.sys) {
      tr.status = "Error";
      tr.reason = sanitize(c.error);
      return;
    }
    SolverParams p = spec.solver;
    p.method = c.method;
    p.rng_seed = tr.seed;
    p.record_trace = t < spec.trace_trials;
    try {
      const ProjectionReport rep = project(*c.sys, starts[std::size_t(t)], p);
      tr.status = to_string(rep.status);
      tr.success = rep.converged();
      tr.steps = rep.steps_used;
      tr.updates = rep.updates;
      tr.residual_evaluations = rep.residual_evaluations;
      tr.gradient_evaluations = rep.gradient_evaluations;
      tr.diverged = rep.diverged;
      tr.initial_norm = rep.initial_norm;
      tr.final_norm = rep.final_norm;
      for (const auto& pm : rep.per_manifold) tr.manifold_mean[manifold_index(pm.kind)] = pm.mean_abs;
      tr.time_s = std::chrono::duration<double>(rep.wall_time).count();
      if (p.record_trace) {
        std::ostringstream os;
        write_trace_csv(*c.sys, rep, os);
        traces[std::size_t(k)] = TraceRecord{tr.set, tr.method, tr.threshold_scale, t, os.str()};
      }
    } catch (const StructuralError& e) {
      tr.status = "Error";
      tr.reason = sanitize(e.what());
    }
  });
  for (auto& t : traces) {
    if (t) res.traces.push_back(std::move(*t));
  }

  std::vector<std::size_t> rows;
  std::vector<std::string> order;
  for (const auto& set : spec.sets) {
    order.push_back(set.label);
    try {
      rows.push_back(ConstraintSystem::assemble(set.specs, spec.model, team, spec.structure).rows());
    } catch (const StructuralError&) {
      rows.push_back(0);
    }
  }
  res.cells = aggregate(res.trials, rows, order);
  res.metadata = machine_metadata(spec.jobs);
  res.metadata["experiment"] = "projection";
  res.metadata["trials"] = spec.trials;
  res.metadata["seed"] = spec.seed;
  res.metadata["start_sampling"] = spec.spread ? nlohmann::json(*spec.spread) : nlohmann::json("uniform_in_bounds");
  res.metadata["team"] = team;
  res.metadata["solver"] = to_json(spec.solver);
  return res;
}

std::vector<ProjectionCell> aggregate(const std::vector<ProjectionTrial>& trials,
                                      const std::vector<std::size_t>& rows_per_set,
                                      const std::vector<std::string>& set_order) {
  using Key = std::tuple<std::string, int, double>;
  std::vector<Key> keys;
  std::map<Key, std::vector<const ProjectionTrial*>> groups;
  for (const auto& t : trials) {
    Key k{t.set, static_cast<int>(t.method), t.threshold_scale};
    auto [it, inserted] = groups.try_emplace(k);
    if (inserted) keys.push_back(k);
    it->second.push_back(&t);
  }
  std::vector<ProjectionCell> out;
  for (const Key& k : keys) {
    const auto& g = groups[k];
    ProjectionCell c;
    c.set = std::get<0>(k);
    c.method = static_cast<Method>(std::get<1>(k));
    c.threshold_scale = std::get<2>(k);
    for (std::size_t s = 0; s < set_order.size() && s < rows_per_set.size(); ++s) {
      if (set_order[s] == c.set) c.rows = rows_per_set[s];
    }
    c.trials = long(g.size());
    std::vector<double> updates, evals, times;
    std::array<std::vector<double>, 5> res;
    for (const auto* t : g) {
      if (!t->success) continue;
      ++c.successes;
      updates.push_back(double(t->updates));
      evals.push_back(double(t->residual_evaluations));
      times.push_back(t->time_s);
      for (int m = 0; m < 5; ++m) {
        if (t->manifold_mean[m]) res[m].push_back(*t->manifold_mean[m]);
      }
    }
    c.success_rate = 100.0 * double(c.successes) / double(c.trials);
    c.updates = mean_std(updates);
    c.residual_evaluations = mean_std(evals);
    c.time_s = mean_std(times);
    for (int m = 0; m < 5; ++m) {
      if (!res[m].empty()) c.manifold_mean[m] = mean_std(res[m]).mean;
    }
    out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Planning experiment

void PlanningBenchSpec::validate() const {
  if (trials < 1) throw StructuralError("bench: trials must be >= 1");
  if (scenarios.empty()) throw StructuralError("bench: no scenarios selected");
  if (complexities.empty()) throw StructuralError("bench: no complexities selected");
  if (solvers.empty()) throw StructuralError("bench: no solvers selected");
  if (jobs < 1) throw StructuralError("bench: jobs must be >= 1");
  planner.validate();
}

long audit_path(const Scenario& s, const std::vector<SystemConfiguration>& waypoints) {
  const ConstraintSystem sys = s.system();
  const CollisionChecker checker(s);
  long bad = 0;
  for (const auto& q : waypoints) bad += audit_node(sys, checker, q).ok() ? 0 : 1;
  return bad;
}

PlanningBenchResult run_planning_benchmark(const PlanningBenchSpec& spec) {
  spec.validate();
  if (!spec.path_dir.empty()) std::filesystem::create_directories(spec.path_dir);
  const std::size_t per_scenario = spec.complexities.size() * spec.solvers.size() * std::size_t(spec.trials);
  PlanningBenchResult res;
  res.trials.resize(spec.scenarios.size() * per_scenario);
  parallel_for(long(res.trials.size()), spec.jobs, [&](long k) {
    std::size_t rest = std::size_t(k);
    const Scenario& base = spec.scenarios[rest / per_scenario];
    rest %= per_scenario;
    const std::size_t per_complexity = spec.solvers.size() * std::size_t(spec.trials);
    const Complexity cx = spec.complexities[rest / per_complexity];
    rest %= per_complexity;
    const Method method = spec.solvers[rest / std::size_t(spec.trials)];
    const long t = long(rest % std::size_t(spec.trials));

    PlanningTrial& tr = res.trials[std::size_t(k)];
    tr.scenario = base.id;
    tr.complexity = cx;
    tr.method = method;
    tr.trial = t;
    tr.env_seed = trial_seed(spec.seed, std::uint64_t(t));
    tr.planner_seed = trial_seed(spec.seed ^ 0x5eedULL, std::uint64_t(t));
    try {
      const Scenario sc = base.with_environment(cx, tr.env_seed, spec.environment);
      tr.clutter_ratio = sc.environment.clutter_ratio();
      PlannerParams pp = spec.planner;
      pp.projection.method = method;
      pp.rng_seed = tr.planner_seed;
      const PlanResult r = plan(sc, pp);
      tr.success = r.success;
      tr.nodes = long(r.nodes.size());
      tr.path_nodes = long(r.path.size());
      tr.extensions = r.stats.extensions;
      tr.projections_attempted = r.stats.projections_attempted;
      tr.projections_succeeded = r.stats.projections_succeeded;
      tr.projection_updates = r.stats.projection_updates;
      if (tr.projections_attempted > 0) {
        tr.projection_success_rate = 100.0 * double(tr.projections_succeeded) / double(tr.projections_attempted);
        tr.updates_per_projection = double(tr.projection_updates) / double(tr.projections_attempted);
        tr.time_per_projection_s =
            std::chrono::duration<double>(r.stats.projection_time).count() / double(tr.projections_attempted);
      }
      tr.plan_time_s = std::chrono::duration<double>(r.stats.wall_time).count();
      if (r.success) {
        tr.audit_violations = audit_path(sc, r.waypoints());
        if (!spec.path_dir.empty()) {
          export_path(sc, r, pp,
                      spec.path_dir / fmt::format("{}_{}_{}_{:03d}.json", sc.id, to_string(cx),
                                                  to_string(method), t));
        }
      } else {
        tr.reason = "node or extension budget exhausted";
      }
    } catch (const StructuralError& e) {
      tr.reason = sanitize(e.what());
    }
  });
  res.cells = aggregate(res.trials, spec.scenarios);
  res.metadata = machine_metadata(spec.jobs);
  res.metadata["experiment"] = "planning";
  res.metadata["trials"] = spec.trials;
  res.metadata["seed"] = spec.seed;
  res.metadata["planner"] = to_json(spec.planner);
  res.metadata["environment"] = {{"min_side", spec.environment.min_side},
                                 {"max_side", spec.environment.max_side}};
  return res;
}

std::vector<PlanningCell> aggregate(const std::vector<PlanningTrial>& trials,
                                    const std::vector<Scenario>& scenarios) {
  using Key = std::tuple<std::string, int, int>;
  std::vector<Key> keys;
  std::map<Key, std::vector<const PlanningTrial*>> groups;
  for (const auto& t : trials) {
    Key k{t.scenario, static_cast<int>(t.complexity), static_cast<int>(t.method)};
    auto [it, inserted] = groups.try_emplace(k);
    if (inserted) keys.push_back(k);
    it->second.push_back(&t);
  }
  std::vector<PlanningCell> out;
  for (const Key& k : keys) {
    const auto& g = groups[k];
    PlanningCell c;
    c.scenario = std::get<0>(k);
    c.complexity = static_cast<Complexity>(std::get<1>(k));
    c.method = static_cast<Method>(std::get<2>(k));
    for (const auto& s : scenarios) {
      if (s.id == c.scenario) {
        c.dof = std::size_t(s.team) * std::size_t(s.model.dof());
        c.rows = s.system().rows();
      }
    }
    c.trials = long(g.size());
    std::vector<double> upp, times, tpp, psr;
    for (const auto* t : g) {
      psr.push_back(t->projection_success_rate);
      c.audit_violations += t->audit_violations;
      if (t->projections_attempted > 0) {
        upp.push_back(t->updates_per_projection);
        tpp.push_back(t->time_per_projection_s);
      }
      if (!t->success) continue;
      ++c.successes;
      times.push_back(t->plan_time_s);
    }
    c.success_rate = 100.0 * double(c.successes) / double(c.trials);
    c.projection_success_rate_mean = mean_std(psr).mean;
    c.updates_per_projection = mean_std(upp);
    c.plan_time_s = mean_std(times);
    c.time_per_projection_s = mean_std(tpp);
    out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string opt(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

class CsvReader {
 public:
  CsvReader(std::istream& in, const std::vector<std::string>& required) : in_(in) {
    std::string header;
    if (!std::getline(in_, header)) return;
    const auto cols = split(header);
    for (std::size_t i = 0; i < cols.size(); ++i) index_[cols[i]] = i;
    for (const auto& r : required) {
      if (!index_.count(r)) throw SchemaError("csv: missing column '" + r + "'");
    }
  }

  bool next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.empty() || line == "\r") continue;
      row_ = split(line);
      return true;
    }
    return false;
  }

  const std::string& str(const std::string& col) const {
    const std::size_t i = index_.at(col);
    if (i >= row_.size()) throw SchemaError(fmt::format("csv line {}: missing field '{}'", line_no_ + 1, col));
    return row_[i];
  }
  double num(const std::string& col) const {
    try {
      return std::stod(str(col));
    } catch (const std::logic_error&) {
      throw SchemaError(fmt::format("csv line {}: field '{}' is not a number", line_no_ + 1, col));
    }
  }
  long integer(const std::string& col) const { return std::lround(num(col)); }
  std::uint64_t u64(const std::string& col) const {
    try {
      return std::stoull(str(col));
    } catch (const std::logic_error&) {
      throw SchemaError(fmt::format("csv line {}: field '{}' is not an integer", line_no_ + 1, col));
    }
  }
  std::optional<double> maybe(const std::string& col) const {
    if (!index_.count(col) || str(col).empty()) return std::nullopt;
    return num(col);
  }

 private:
  std::istream& in_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> row_;
  long line_no_ = 0;
};

}  // namespace

void write_csv(const std::vector<ProjectionTrial>& trials, std::ostream& out) {
  out << "set,method,threshold_scale,trial,seed,status,success,steps,updates,residual_evaluations,"
         "gradient_evaluations,diverged,initial_norm,final_norm,m1_mean,m2_mean,m3_mean,m4_mean,"
         "m5_mean,time_s,reason\n";
  for (const auto& t : trials) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", t.set,
                       to_string(t.method), t.threshold_scale, t.trial, t.seed, t.status,
                       int(t.success), t.steps, t.updates, t.residual_evaluations,
                       t.gradient_evaluations, int(t.diverged), t.initial_norm, t.final_norm,
                       opt(t.manifold_mean[0]), opt(t.manifold_mean[1]), opt(t.manifold_mean[2]),
                       opt(t.manifold_mean[3]), opt(t.manifold_mean[4]), t.time_s, t.reason);
  }
}

void write_csv(const std::vector<ProjectionCell>& cells, std::ostream& out) {
  out << "set,method,threshold_scale,rows,trials,successes,success_rate,updates_mean,updates_std,"
         "residual_evaluations_mean,m1_mean,m2_mean,m3_mean,m4_mean,m5_mean,time_mean_s,"
         "time_std_s\n";
  for (const auto& c : cells) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", c.set,
                       to_string(c.method), c.threshold_scale, c.rows, c.trials, c.successes,
                       c.success_rate, c.updates.mean, c.updates.std, c.residual_evaluations.mean,
                       opt(c.manifold_mean[0]), opt(c.manifold_mean[1]), opt(c.manifold_mean[2]),
                       opt(c.manifold_mean[3]), opt(c.manifold_mean[4]), c.time_s.mean, c.time_s.std);
  }
}

void write_csv(const std::vector<PlanningTrial>& trials, std::ostream& out) {
  out << "scenario,complexity,method,trial,env_seed,planner_seed,clutter_ratio,success,nodes,"
         "path_nodes,extensions,projections_attempted,projections_succeeded,"
         "projection_success_rate,projection_updates,updates_per_projection,audit_violations,"
         "plan_time_s,time_per_projection_s,reason\n";
  for (const auto& t : trials) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", t.scenario,
                       to_string(t.complexity), to_string(t.method), t.trial, t.env_seed,
                       t.planner_seed, t.clutter_ratio, int(t.success), t.nodes, t.path_nodes,
                       t.extensions, t.projections_attempted, t.projections_succeeded,
                       t.projection_success_rate, t.projection_updates, t.updates_per_projection,
                       t.audit_violations, t.plan_time_s, t.time_per_projection_s, t.reason);
  }
}

void write_csv(const std::vector<PlanningCell>& cells, std::ostream& out) {
  out << "scenario,complexity,method,dof,rows,trials,successes,success_rate,"
         "projection_success_rate_mean,updates_per_projection_mean,updates_per_projection_std,"
         "audit_violations,plan_time_mean_s,plan_time_std_s,time_per_projection_mean_s,"
         "time_per_projection_std_s\n";
  for (const auto& c : cells) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", c.scenario,
                       to_string(c.complexity), to_string(c.method), c.dof, c.rows, c.trials,
                       c.successes, c.success_rate, c.projection_success_rate_mean,
                       c.updates_per_projection.mean, c.updates_per_projection.std,
                       c.audit_violations, c.plan_time_s.mean, c.plan_time_s.std,
                       c.time_per_projection_s.mean, c.time_per_projection_s.std);
  }
}

std::vector<ProjectionTrial> read_projection_trials(std::istream& in) {
  CsvReader csv(in, {"set", "method", "threshold_scale", "trial", "seed", "status", "success",
                     "steps", "updates", "residual_evaluations", "time_s"});
  std::vector<ProjectionTrial> out;
  while (csv.next()) {
    ProjectionTrial t;
    t.set = csv.str("set");
    try {
      t.method = method_from_string(csv.str("method"));
    } catch (const StructuralError& e) {
      throw SchemaError(std::string("csv: ") + e.what());
    }
    t.threshold_scale = csv.num("threshold_scale");
    t.trial = csv.integer("trial");
    t.seed = csv.u64("seed");
    t.status = csv.str("status");
    t.success = csv.integer("success") != 0;
    t.steps = csv.integer("steps");
    t.updates = csv.integer("updates");
    t.residual_evaluations = csv.integer("residual_evaluations");
    if (auto v = csv.maybe("gradient_evaluations")) t.gradient_evaluations = std::lround(*v);
    if (auto v = csv.maybe("diverged")) t.diverged = *v != 0.0;
    if (auto v = csv.maybe("initial_norm")) t.initial_norm = *v;
    if (auto v = csv.maybe("final_norm")) t.final_norm = *v;
    for (int m = 0; m < 5; ++m) t.manifold_mean[m] = csv.maybe(fmt::format("m{}_mean", m + 1));
    t.time_s = csv.num("time_s");
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<PlanningTrial> read_planning_trials(std::istream& in) {
  CsvReader csv(in, {"scenario", "complexity", "method", "trial", "success",
                     "projections_attempted", "updates_per_projection", "plan_time_s"});
  std::vector<PlanningTrial> out;
  while (csv.next()) {
    PlanningTrial t;
    t.scenario = csv.str("scenario");
    try {
      t.complexity = complexity_from_string(csv.str("complexity"));
      t.method = method_from_string(csv.str("method"));
    } catch (const SchemaError&) {
      throw;
    } catch (const StructuralError& e) {
      throw SchemaError(std::string("csv: ") + e.what());
    }
    t.trial = csv.integer("trial");
    if (auto v = csv.maybe("env_seed")) t.env_seed = csv.u64("env_seed");
    if (auto v = csv.maybe("planner_seed")) t.planner_seed = csv.u64("planner_seed");
    if (auto v = csv.maybe("clutter_ratio")) t.clutter_ratio = *v;
    t.success = csv.integer("success") != 0;
    if (auto v = csv.maybe("nodes")) t.nodes = std::lround(*v);
    if (auto v = csv.maybe("path_nodes")) t.path_nodes = std::lround(*v);
    if (auto v = csv.maybe("extensions")) t.extensions = std::lround(*v);
    t.projections_attempted = csv.integer("projections_attempted");
    if (auto v = csv.maybe("projections_succeeded")) t.projections_succeeded = std::lround(*v);
    if (auto v = csv.maybe("projection_success_rate")) t.projection_success_rate = *v;
    if (auto v = csv.maybe("projection_updates")) t.projection_updates = std::lround(*v);
    t.updates_per_projection = csv.num("updates_per_projection");
    if (auto v = csv.maybe("audit_violations")) t.audit_violations = std::lround(*v);
    t.plan_time_s = csv.num("plan_time_s");
    if (auto v = csv.maybe("time_per_projection_s")) t.time_per_projection_s = *v;
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

void write_file(const std::filesystem::path& p, const auto& writer) {
  std::ofstream out(p);
  if (!out) throw SchemaError(p.string() + ": cannot write");
  writer(out);
}

}  // namespace

void write_outputs(const ProjectionBenchResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "projection_trials.csv", [&](std::ostream& o) { write_csv(r.trials, o); });
  write_file(dir / "projection_cells.csv", [&](std::ostream& o) { write_csv(r.cells, o); });
  write_file(dir / "projection_metadata.json", [&](std::ostream& o) { o << r.metadata.dump(2) << '\n'; });
  if (!r.traces.empty()) {
    std::filesystem::create_directories(dir / "traces");
    for (const auto& t : r.traces) {
      write_file(dir / "traces" /
                     fmt::format("{}_{}_x{}_{:03d}.csv", t.set, to_string(t.method), t.threshold_scale, t.trial),
                 [&](std::ostream& o) { o << t.csv; });
    }
  }
}

void write_outputs(const PlanningBenchResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "planning_trials.csv", [&](std::ostream& o) { write_csv(r.trials, o); });
  write_file(dir / "planning_cells.csv", [&](std::ostream& o) { write_csv(r.cells, o); });
  write_file(dir / "planning_metadata.json", [&](std::ostream& o) { o << r.metadata.dump(2) << '\n'; });
}

}  // namespace cnkz
