#pragma once

// Projection of a configuration onto the intersection of constraint
// manifolds. Four methods share one interface:
//
//   cNKZ  cyclic single-row Kaczmarz updates, skipping rows already within
//         their own manifold threshold; stops when every row is within its
//         threshold.
//   NKZ   the same loop with one global threshold; every row is updated on
//         every visit.
//   NR    Newton-Raphson on the full system with a Moore-Penrose pseudo-inverse.
//   CIM   Cimmino: average of all single-row updates taken from one base point.
//
// All methods return the best iterate seen (smallest weighted residual norm),
// never something worse than the start.

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cnkz/constraints.hpp"

namespace cnkz {

enum class Method { CNKZ, NKZ, NR, CIM };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

enum class ProjectionStatus { Converged, BudgetExhausted, SingularStall };

std::string to_string(ProjectionStatus s);

// Which residual drives the Kaczmarz row test and update after a step that
// did not lower the norm.
enum class ResidualMode {
  Stale,    // last accepted residual; the iterate keeps moving from the rejected point
  Revert,   // last accepted residual; the iterate returns to the accepted point
  Iterate,  // residual at the current iterate; the accepted point is only the output
};

std::string to_string(ResidualMode m);
ResidualMode residual_mode_from_string(const std::string& s);

struct SolverParams {
  Method method = Method::CNKZ;
  long max_cycles = 2000;  // NKZ/cNKZ: max_cycles * l row visits; NR/CIM: iterations
  std::optional<double> global_threshold;  // NKZ/NR/CIM; defaults to the strictest manifold threshold
  double nr_step_scale = 1.0;      // (0, 1]
  double nr_singular_cutoff = 1e-10;
  double nr_divergence = 1e6;
  double cim_relaxation = 1.0;     // (0, 2)
  std::uint64_t rng_seed = 0;
  bool randomized_order = false;   // Kaczmarz row order; cyclic when false
  ResidualMode residual_mode = ResidualMode::Iterate;
  bool record_trace = false;
  // Recompute only the rows touched by the updated robots instead of the full
  // residual after each update. Not used by the reference benchmarks.
  bool fast_mode = false;

  void validate() const;
};

struct TraceStep {
  long step = 0;
  long row = -1;          // row visited at this step; -1 for whole-system methods
  bool updated = false;   // an update was applied (not skipped, not singular)
  bool accepted = false;  // the update improved the tracked residual
  double norm = 0.0;      // weighted 2-norm of the tracked residual after the step
  std::vector<double> unweighted;  // tracked per-row values after the step
};

/// Scalar rows F_i(q) = w_i * h_i(q) over a flat coordinate vector. The
/// solvers only see this interface; ConstraintSystem is adapted to it.
class RowSystem {
 public:
  virtual ~RowSystem() = default;

  virtual std::size_t rows() const = 0;
  virtual std::size_t dof() const = 0;
  /// Unweighted h.
  virtual void evaluate(std::span<const double> q, std::span<double> h) const = 0;
  /// Gradient of the weighted row; false when singular.
  virtual bool gradient(std::span<const double> q, std::size_t row, std::span<double> g) const = 0;
  virtual double threshold(std::size_t row) const = 0;
  virtual double weight(std::size_t) const { return 1.0; }

  /// Coordinates are grouped in consecutive blocks of this size; rows touching
  /// no moved block keep their value under evaluate_moved.
  virtual std::size_t block_size() const { return dof(); }
  virtual void evaluate_moved(std::span<const double> q, std::span<const std::uint8_t>,
                              std::span<double> h) const {
    evaluate(q, h);
  }
  /// Canonicalize periodic coordinates after a step.
  virtual void normalize(std::span<double>) const {}
};

struct RowReport {
  ProjectionStatus status = ProjectionStatus::BudgetExhausted;
  Method method = Method::CNKZ;
  std::vector<double> solution;   // best iterate (q_proj)
  long steps_used = 0;
  long updates = 0;               // single-row updates (NR/CIM: iterations)
  long residual_evaluations = 0;  // full F evaluations
  long gradient_evaluations = 0;  // single-row Jacobian evaluations
  bool diverged = false;
  double initial_norm = 0.0;
  double final_norm = 0.0;
  std::chrono::nanoseconds wall_time{0};
  std::vector<double> final_unweighted;  // per row at `solution`
  std::vector<TraceStep> trace;

  bool converged() const { return status == ProjectionStatus::Converged; }
};

/// Runs params.method on a generic row system.
RowReport solve(const RowSystem& sys, std::span<const double> q0, const SolverParams& params);

struct ManifoldResidualStats {
  ManifoldKind kind;
  double max_abs = 0.0;
  double mean_abs = 0.0;
};

struct ProjectionReport : RowReport {
  SystemConfiguration result;
  std::vector<ManifoldResidualStats> per_manifold;
};

ProjectionReport project(const ConstraintSystem& sys, const SystemConfiguration& q0,
                         const SolverParams& params);

ProjectionReport project_cnkz(const ConstraintSystem& sys, const SystemConfiguration& q0,
                              SolverParams params);
ProjectionReport project_nkz(const ConstraintSystem& sys, const SystemConfiguration& q0,
                             SolverParams params);
ProjectionReport project_nr(const ConstraintSystem& sys, const SystemConfiguration& q0,
                            SolverParams params);
ProjectionReport project_cim(const ConstraintSystem& sys, const SystemConfiguration& q0,
                             SolverParams params);

/// One Kaczmarz step on row i: returns dq = -(F_i / |g|^2) g for the weighted
/// row value F_i and gradient g; empty when |g| is below the singular cutoff.
std::optional<std::vector<double>> kaczmarz_step(double weighted_value, std::span<const double> g);

/// CSV columns: step,row,manifold,unweighted_residual,weighted_residual,norm,accepted
/// One line per step for the visited row. Whole-system methods (NR, CIM) write
/// row -1, manifold "all" and the largest absolute row value.
void write_trace_csv(const ConstraintSystem& sys, const ProjectionReport& report, std::ostream& out);

}  // namespace cnkz
