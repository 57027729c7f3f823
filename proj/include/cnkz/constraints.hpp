#pragma once

// Constraint manifolds as residual rows with analytic gradients, concatenated
// into one system F: R^m -> R^l with a per-row threshold vector.
//
// Each manifold expands into a family of rows over robot pairs or triples. The
// family is a manifold parameter; e.g. planarity can be stated over all pairs
// or along a chain. Row order is manifold order, then the family's
// lexicographic order.
//
// Sign conventions:
//   distance   |‖p_i − p_j‖ − L_ij|               (i < j for AllPairs)
//   angle      û_ij · û_jk − cos(expected)         û = unit(p_a − p_b)
//              ‖û_ij × û_jk‖  for collinear contact triples (replaces the dot row)
//   orient     û_ij · o_k
//   plane      n · (p_i − p_j)                     default n = +z
//   diff-drive u_x sin(yaw) − u_y cos(yaw)

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cnkz/kinematics.hpp"
#include "cnkz/structure.hpp"

namespace cnkz {

enum class ManifoldKind {
  StructureFixedDistance,  // M1
  StructureFixedAngle,     // M2
  TaskFixedOrient,         // M3
  TaskSamePlane,           // M4
  RobotDiffDrive,          // M5
};

std::string to_string(ManifoldKind k);
std::string short_name(ManifoldKind k);  // "M1".."M5"
ManifoldKind manifold_kind_from_string(const std::string& s);  // accepts either form

enum class PairFamily { AllPairs, Chain };
enum class TripleFamily { ChainAnchored, VertexCentered, AllOrdered };
enum class OrientFamily { AllOthers, Neighbor, OrderedTriples };

std::string to_string(PairFamily f);
std::string to_string(TripleFamily f);
std::string to_string(OrientFamily f);
PairFamily pair_family_from_string(const std::string& s);
TripleFamily triple_family_from_string(const std::string& s);
OrientFamily orient_family_from_string(const std::string& s);

struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::StructureFixedDistance;
  double threshold = 5e-3;
  double weight = 1.0;
  PairFamily pairs = PairFamily::AllPairs;          // M1, M4
  TripleFamily triples = TripleFamily::ChainAnchored;  // M2
  OrientFamily orient = OrientFamily::AllOthers;    // M3
  Vec3 plane_normal = Vec3::UnitZ();                 // M4

  static ManifoldSpec defaults(ManifoldKind kind);
  bool operator==(const ManifoldSpec&) const = default;
};

enum class RowType { Distance, AngleDot, AngleCross, Orient, Plane, DiffDrive };

struct Row {
  RowType type = RowType::Distance;
  int manifold = 0;  // index into the system's manifold list
  int local = 0;     // row index within the manifold
  std::array<int, 3> robots{-1, -1, -1};
  double target = 0.0;  // L_ij for distance rows, expected cosine for angle rows
};

struct ManifoldBlock {
  ManifoldSpec spec;
  std::size_t first_row = 0;
  std::size_t rows = 0;
};

class ConstraintSystem {
 public:
  /// Throws StructuralError when a manifold does not apply to the team (e.g.
  /// angles with fewer than three robots, diff-drive without velocity DoFs).
  static ConstraintSystem assemble(std::vector<ManifoldSpec> specs, const RobotModel& model,
                                   int team, const Structure& structure);

  const RobotModel& model() const { return model_; }
  const Structure& structure() const { return structure_; }
  int team() const { return team_; }
  std::size_t rows() const { return rows_.size(); }
  std::size_t dof() const { return std::size_t(team_) * model_.dof(); }

  const std::vector<ManifoldBlock>& manifolds() const { return blocks_; }
  const std::vector<Row>& row_map() const { return rows_; }
  const std::vector<double>& thresholds() const { return thresholds_; }
  const std::vector<double>& weights() const { return weights_; }
  double min_threshold() const;

  /// Unweighted row values h.
  void evaluate(std::span<const double> q, std::span<double> out) const;
  std::vector<double> evaluate(const SystemConfiguration& q) const;
  /// Recompute only rows that involve a robot with moved[robot] != 0; other
  /// entries of `out` are left as they are.
  void evaluate_moved(std::span<const double> q, std::span<const std::uint8_t> moved,
                      std::span<double> out) const;

  /// r = -F(q) with F = w * h, the residual vector the projection loop tracks.
  std::vector<double> residual(const SystemConfiguration& q) const;

  /// Gradient of the weighted row F_i over all m DoFs. Returns false when the
  /// row is singular (coincident end-effectors, zero-length vectors); `out`
  /// is then zero.
  bool gradient(std::span<const double> q, std::size_t row, std::span<double> out) const;

  bool row_satisfied(std::size_t row, double unweighted) const {
    return std::abs(unweighted) <= thresholds_[row];
  }
  bool satisfied(std::span<const double> unweighted) const;

  void check_configuration(const SystemConfiguration& q) const;

 private:
  double row_value(std::size_t k, const EndEffector* ee, std::span<const double> q) const;

  RobotModel model_;
  Structure structure_;
  int team_ = 0;
  std::vector<ManifoldBlock> blocks_;
  std::vector<Row> rows_;
  std::vector<double> thresholds_;
  std::vector<double> weights_;
};

/// Rows of a single manifold evaluated on its own.
std::vector<double> manifold_residuals(const ManifoldSpec& spec, const RobotModel& model,
                                       const Structure& structure, const SystemConfiguration& q);

}  // namespace cnkz
