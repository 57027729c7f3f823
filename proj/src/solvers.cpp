#include "cnkz/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include <Eigen/SVD>

#include "cnkz/kernels.hpp"

namespace cnkz {

std::string to_string(Method m) {
  switch (m) {
    case Method::CNKZ: return "cNKZ";
    case Method::NKZ: return "NKZ";
    case Method::NR: return "NR";
    case Method::CIM: return "CIM";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  std::string l = s;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "cnkz") return Method::CNKZ;
  if (l == "nkz") return Method::NKZ;
  if (l == "nr") return Method::NR;
  if (l == "cim") return Method::CIM;
  throw StructuralError("unknown solver method '" + s + "' (expected cNKZ, NKZ, NR or CIM)");
}

std::string to_string(ProjectionStatus s) {
  switch (s) {
    case ProjectionStatus::Converged: return "Converged";
    case ProjectionStatus::BudgetExhausted: return "BudgetExhausted";
    case ProjectionStatus::SingularStall: return "SingularStall";
  }
  return "?";
}

std::string to_string(ResidualMode m) {
  switch (m) {
    case ResidualMode::Stale: return "stale";
    case ResidualMode::Revert: return "revert";
    case ResidualMode::Iterate: return "iterate";
  }
  return "?";
}

ResidualMode residual_mode_from_string(const std::string& s) {
  if (s == "stale") return ResidualMode::Stale;
  if (s == "revert") return ResidualMode::Revert;
  if (s == "iterate") return ResidualMode::Iterate;
  throw StructuralError("unknown residual mode '" + s + "' (expected stale, revert or iterate)");
}

void SolverParams::validate() const {
  if (max_cycles < 0) throw StructuralError("solver: max_cycles must be >= 0");
  if (!(nr_step_scale > 0.0 && nr_step_scale <= 1.0)) {
    throw StructuralError("solver: nr_step_scale must be in (0, 1]");
  }
  if (!(cim_relaxation > 0.0 && cim_relaxation < 2.0)) {
    throw StructuralError("solver: cim_relaxation must be in (0, 2)");
  }
  if (global_threshold && !(*global_threshold >= 0.0)) {
    throw StructuralError("solver: global_threshold must be >= 0");
  }
}

namespace {

constexpr double kSingularGrad = 1e-12;

using Clock = std::chrono::steady_clock;

// Shared bookkeeping for every method: the accepted residual h (at q_proj),
// the residual at the current iterate, and counters.
class Tracker {
 public:
  Tracker(const RowSystem& sys, std::span<const double> q0, const SolverParams& p)
      : sys_(sys), params_(p), l_(sys.rows()) {
    rep_.method = p.method;
    rep_.solution.assign(q0.begin(), q0.end());
    w_.resize(l_);
    thr_.resize(l_);
    for (std::size_t i = 0; i < l_; ++i) {
      w_[i] = sys.weight(i);
      thr_[i] = sys.threshold(i);
    }
    h_.resize(l_);
    f_.resize(l_);
    sys.evaluate(q0, h_);
    ++rep_.residual_evaluations;
    cur_ = h_;
    norm_ = weighted_norm(h_);
    last_norm_ = norm_;
    rep_.initial_norm = norm_;
    global_ = p.global_threshold.value_or(
        l_ == 0 ? 0.0 : *std::min_element(thr_.begin(), thr_.end()));
  }

  std::size_t rows() const { return l_; }
  double global_threshold() const { return global_; }
  RowReport& report() { return rep_; }
  const std::vector<double>& current() const { return cur_; }
  double weight(std::size_t i) const { return w_[i]; }

  bool ok(const std::vector<double>& h, std::size_t i, bool per_row) const {
    return std::abs(h[i]) <= (per_row ? thr_[i] : global_);
  }
  bool all_ok(const std::vector<double>& h, bool per_row) const {
    for (std::size_t i = 0; i < l_; ++i)
      if (!ok(h, i, per_row)) return false;
    return true;
  }
  const std::vector<double>& accepted() const { return h_; }

  // Evaluate F at the new iterate q (fully, or only rows touching `moved`
  // blocks) and accept q as q_proj if the norm improved.
  bool offer(std::span<const double> q, std::span<const std::uint8_t> moved = {}) {
    if (moved.empty()) {
      sys_.evaluate(q, cur_);
    } else {
      sys_.evaluate_moved(q, moved, cur_);
    }
    ++rep_.residual_evaluations;
    last_norm_ = weighted_norm(cur_);
    if (last_norm_ < norm_) {
      adopt(q);
      return true;
    }
    return false;
  }

  double last_norm() const { return last_norm_; }
  void revert() { cur_ = h_; }
  void adopt(std::span<const double> q) {
    h_ = cur_;
    norm_ = last_norm_;
    rep_.solution.assign(q.begin(), q.end());
  }

  void record(long step, long row, bool updated, bool accepted) {
    if (!params_.record_trace) return;
    rep_.trace.push_back({step, row, updated, accepted, norm_, h_});
  }

  RowReport finish(ProjectionStatus status, Clock::time_point start) {
    rep_.status = status;
    rep_.final_unweighted = h_;
    rep_.final_norm = norm_;
    rep_.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
    return std::move(rep_);
  }

 private:
  double weighted_norm(const std::vector<double>& h) {
    for (std::size_t i = 0; i < l_; ++i) f_[i] = w_[i] * h[i];
    return std::sqrt(kernels::sum_squares(f_));
  }

  const RowSystem& sys_;
  const SolverParams& params_;
  std::size_t l_;
  RowReport rep_;
  std::vector<double> w_, thr_, h_, cur_, f_;
  double norm_ = 0.0;
  double last_norm_ = 0.0;
  double global_ = 0.0;
};

// Shared loop for cNKZ (per-manifold thresholds, skip satisfied rows) and
// NKZ (global threshold, update every row).
RowReport kaczmarz(const RowSystem& sys, std::span<const double> q0, const SolverParams& params,
                   bool constrained) {
  const auto start = Clock::now();
  Tracker t(sys, q0, params);
  const std::size_t l = t.rows();
  if (l == 0) return t.finish(ProjectionStatus::Converged, start);

  std::vector<double> q(q0.begin(), q0.end()), g(q.size());
  const std::size_t bs = std::max<std::size_t>(1, sys.block_size());
  std::vector<std::uint8_t> moved((q.size() + bs - 1) / bs, 0);
  std::mt19937_64 rng(params.rng_seed);
  std::uniform_int_distribution<std::size_t> pick(0, l - 1);

  const bool iterate = params.residual_mode == ResidualMode::Iterate;
  auto tested = [&]() -> const std::vector<double>& { return iterate ? t.current() : t.accepted(); };

  // Singular stall: a full window of l steps where every unsatisfied row visited was singular.
  std::size_t window_unsat = 0, window_singular = 0;
  bool stalled = false;

  const long budget = params.max_cycles * long(l);
  long step = 0;
  while (!t.all_ok(t.accepted(), constrained) && step < budget) {
    const std::size_t i = params.randomized_order ? pick(rng) : std::size_t(step) % l;
    bool updated = false, accepted = false;
    const bool unsat = !t.ok(tested(), i, constrained);
    if (unsat || !constrained) {
      window_unsat += unsat ? 1 : 0;
      const bool regular = sys.gradient(q, i, g);
      ++t.report().gradient_evaluations;
      const double gg = kernels::sum_squares(g);
      if (!regular || std::sqrt(gg) < kSingularGrad) {
        window_singular += unsat ? 1 : 0;
      } else {
        // q <- q + (r_i / |g|^2) g with r = -F.
        const double r_i = -t.weight(i) * tested()[i];
        kernels::axpy(r_i / gg, g, q);
        sys.normalize(q);
        ++t.report().updates;
        updated = true;
        if (params.fast_mode) {
          for (std::size_t b = 0; b < moved.size(); ++b) {
            moved[b] = 0;
            for (std::size_t d = b * bs; d < std::min(q.size(), (b + 1) * bs); ++d)
              if (g[d] != 0.0) moved[b] = 1;
          }
          accepted = t.offer(q, moved);
        } else {
          accepted = t.offer(q);
        }
        if (!accepted && iterate && t.all_ok(t.current(), constrained) &&
            t.last_norm() <= t.report().initial_norm) {
          t.adopt(q);
          accepted = true;
        } else if (!accepted && params.residual_mode == ResidualMode::Revert) {
          q = t.report().solution;
          t.revert();
        }
      }
    }
    t.record(step, long(i), updated, accepted);
    ++step;
    if ((step % long(l)) == 0) {
      if (window_unsat > 0 && window_singular == window_unsat) {
        stalled = true;
        break;
      }
      window_unsat = window_singular = 0;
    }
  }
  t.report().steps_used = step;
  if (t.all_ok(t.accepted(), constrained)) return t.finish(ProjectionStatus::Converged, start);
  return t.finish(stalled ? ProjectionStatus::SingularStall : ProjectionStatus::BudgetExhausted, start);
}

RowReport newton(const RowSystem& sys, std::span<const double> q0, const SolverParams& params) {
  const auto start = Clock::now();
  Tracker t(sys, q0, params);
  const std::size_t l = t.rows(), m = q0.size();
  if (l == 0) return t.finish(ProjectionStatus::Converged, start);

  std::vector<double> q(q0.begin(), q0.end()), g(m);
  Eigen::MatrixXd jac(l, m);
  Eigen::VectorXd f(l);
  long it = 0;
  while (!t.all_ok(t.accepted(), false) && it < params.max_cycles) {
    const auto& h = t.current();
    for (std::size_t i = 0; i < l; ++i) {
      sys.gradient(q, i, g);
      ++t.report().gradient_evaluations;
      jac.row(Eigen::Index(i)) = Eigen::Map<const Eigen::RowVectorXd>(g.data(), Eigen::Index(m));
      f[Eigen::Index(i)] = t.weight(i) * h[i];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    Eigen::VectorXd utf = svd.matrixU().transpose() * f;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
      utf[k] = sv[k] > params.nr_singular_cutoff ? utf[k] / sv[k] : 0.0;
    }
    const Eigen::VectorXd dq = -params.nr_step_scale * (svd.matrixV() * utf);
    for (std::size_t d = 0; d < m; ++d) q[d] += dq[Eigen::Index(d)];
    sys.normalize(q);
    ++t.report().updates;
    const bool accepted = t.offer(q);
    t.record(it, -1, true, accepted);
    ++it;
    if (!std::isfinite(t.last_norm()) || t.last_norm() > params.nr_divergence) {
      t.report().diverged = true;
      break;
    }
  }
  t.report().steps_used = it;
  return t.finish(t.all_ok(t.accepted(), false) ? ProjectionStatus::Converged
                                                : ProjectionStatus::BudgetExhausted,
                  start);
}

RowReport cimmino(const RowSystem& sys, std::span<const double> q0, const SolverParams& params) {
  const auto start = Clock::now();
  Tracker t(sys, q0, params);
  const std::size_t l = t.rows(), m = q0.size();
  if (l == 0) return t.finish(ProjectionStatus::Converged, start);

  std::vector<double> q(q0.begin(), q0.end()), g(m), sum(m);
  bool stalled = false;
  long it = 0;
  while (!t.all_ok(t.accepted(), false) && it < params.max_cycles) {
    const auto& h = t.current();
    std::fill(sum.begin(), sum.end(), 0.0);
    std::size_t used = 0;
    for (std::size_t i = 0; i < l; ++i) {
      if (t.ok(h, i, false)) continue;
      const bool regular = sys.gradient(q, i, g);
      ++t.report().gradient_evaluations;
      const double gg = kernels::sum_squares(g);
      if (!regular || std::sqrt(gg) < kSingularGrad) continue;
      kernels::axpy(-t.weight(i) * h[i] / gg, g, sum);
      ++used;
    }
    if (used == 0) {
      stalled = true;
      break;
    }
    kernels::axpy(params.cim_relaxation / double(used), sum, q);
    sys.normalize(q);
    ++t.report().updates;
    const bool accepted = t.offer(q);
    t.record(it, -1, true, accepted);
    ++it;
  }
  t.report().steps_used = it;
  if (t.all_ok(t.accepted(), false)) return t.finish(ProjectionStatus::Converged, start);
  return t.finish(stalled ? ProjectionStatus::SingularStall : ProjectionStatus::BudgetExhausted, start);
}

class TeamRows final : public RowSystem {
 public:
  explicit TeamRows(const ConstraintSystem& sys) : sys_(sys) {}

  std::size_t rows() const override { return sys_.rows(); }
  std::size_t dof() const override { return sys_.dof(); }
  void evaluate(std::span<const double> q, std::span<double> h) const override {
    sys_.evaluate(q, h);
  }
  bool gradient(std::span<const double> q, std::size_t row, std::span<double> g) const override {
    return sys_.gradient(q, row, g);
  }
  double threshold(std::size_t row) const override { return sys_.thresholds()[row]; }
  double weight(std::size_t row) const override { return sys_.weights()[row]; }
  std::size_t block_size() const override { return std::size_t(sys_.model().dof()); }
  void evaluate_moved(std::span<const double> q, std::span<const std::uint8_t> moved,
                      std::span<double> h) const override {
    sys_.evaluate_moved(q, moved, h);
  }
  void normalize(std::span<double> q) const override {
    const std::size_t r = block_size();
    for (std::size_t b = 0; b + dof::kYaw < q.size(); b += r) {
      double& yaw = q[b + dof::kYaw];
      if (yaw <= -M_PI || yaw > M_PI) yaw = wrap_angle(yaw);
    }
  }

 private:
  const ConstraintSystem& sys_;
};

ProjectionReport team_project(const ConstraintSystem& sys, const SystemConfiguration& q0,
                              const SolverParams& params) {
  sys.check_configuration(q0);
  ProjectionReport out;
  static_cast<RowReport&>(out) = solve(TeamRows(sys), q0.span(), params);
  out.result = SystemConfiguration(q0.robots(), q0.dof_per_robot(),
                                   Eigen::Map<const Eigen::VectorXd>(out.solution.data(),
                                                                     Eigen::Index(out.solution.size())));
  for (const auto& b : sys.manifolds()) {
    ManifoldResidualStats s{b.spec.kind, 0.0, 0.0};
    for (std::size_t i = b.first_row; i < b.first_row + b.rows; ++i) {
      s.max_abs = std::max(s.max_abs, std::abs(out.final_unweighted[i]));
      s.mean_abs += std::abs(out.final_unweighted[i]);
    }
    if (b.rows > 0) s.mean_abs /= double(b.rows);
    out.per_manifold.push_back(s);
  }
  return out;
}

}  // namespace

RowReport solve(const RowSystem& sys, std::span<const double> q0, const SolverParams& params) {
  params.validate();
  if (q0.size() != sys.dof()) {
    throw StructuralError("solve: configuration has " + std::to_string(q0.size()) +
                          " coordinates, system expects " + std::to_string(sys.dof()));
  }
  switch (params.method) {
    case Method::CNKZ: return kaczmarz(sys, q0, params, true);
    case Method::NKZ: return kaczmarz(sys, q0, params, false);
    case Method::NR: return newton(sys, q0, params);
    case Method::CIM: return cimmino(sys, q0, params);
  }
  throw StructuralError("unknown solver method");
}

std::optional<std::vector<double>> kaczmarz_step(double weighted_value, std::span<const double> g) {
  const double gg = kernels::sum_squares(g);
  if (std::sqrt(gg) < kSingularGrad) return std::nullopt;
  std::vector<double> dq(g.size(), 0.0);
  kernels::axpy(-weighted_value / gg, g, dq);
  return dq;
}

ProjectionReport project(const ConstraintSystem& sys, const SystemConfiguration& q0,
                         const SolverParams& params) {
  return team_project(sys, q0, params);
}

ProjectionReport project_cnkz(const ConstraintSystem& sys, const SystemConfiguration& q0,
                              SolverParams params) {
  params.method = Method::CNKZ;
  return team_project(sys, q0, params);
}

ProjectionReport project_nkz(const ConstraintSystem& sys, const SystemConfiguration& q0,
                             SolverParams params) {
  params.method = Method::NKZ;
  return team_project(sys, q0, params);
}

ProjectionReport project_nr(const ConstraintSystem& sys, const SystemConfiguration& q0,
                            SolverParams params) {
  params.method = Method::NR;
  return team_project(sys, q0, params);
}

ProjectionReport project_cim(const ConstraintSystem& sys, const SystemConfiguration& q0,
                             SolverParams params) {
  params.method = Method::CIM;
  return team_project(sys, q0, params);
}

void write_trace_csv(const ConstraintSystem& sys, const ProjectionReport& report, std::ostream& out) {
  out << "step,row,manifold,unweighted_residual,weighted_residual,norm,accepted\n";
  out.precision(17);
  for (const auto& s : report.trace) {
    if (s.row >= 0) {
      const auto& row = sys.row_map()[s.row];
      const double u = s.unweighted[s.row];
      out << s.step << ',' << s.row << ','
          << short_name(sys.manifolds()[row.manifold].spec.kind) << ',' << u << ','
          << sys.weights()[s.row] * u << ',' << s.norm << ',' << (s.accepted ? 1 : 0) << '\n';
    } else {
      double umax = 0.0, wmax = 0.0;
      for (std::size_t i = 0; i < s.unweighted.size(); ++i) {
        umax = std::max(umax, std::abs(s.unweighted[i]));
        wmax = std::max(wmax, std::abs(sys.weights()[i] * s.unweighted[i]));
      }
      out << s.step << ",-1,all," << umax << ',' << wmax << ',' << s.norm << ','
          << (s.accepted ? 1 : 0) << '\n';
    }
  }
}

}  // namespace cnkz
