#pragma once

// Scenario files: robot model, team, carried structure, manifold set,
// environment and start/goal structure poses.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "cnkz/constraints.hpp"
#include "cnkz/geometry.hpp"
#include "cnkz/structure.hpp"

namespace cnkz {

/// Malformed scenario/path/report files. The message starts with the field path.
class SchemaError : public StructuralError {
 public:
  using StructuralError::StructuralError;
};

enum class Complexity { None, Low, Medium, Hard };

std::string to_string(Complexity c);
Complexity complexity_from_string(const std::string& s);

/// Obstacle volume / bounds volume, half-open [lo, hi). None is [0, 0].
struct ClutterBand {
  double lo = 0.0;
  double hi = 0.0;
};
ClutterBand clutter_band(Complexity c);

struct Environment {
  Aabb bounds{Vec3::Zero(), Vec3::Constant(20.0)};
  std::vector<Aabb> obstacles;
  Complexity complexity = Complexity::None;
  std::uint64_t seed = 0;

  double clutter_ratio() const;
  bool operator==(const Environment& o) const;
};

struct EnvironmentParams {
  double min_side = 0.5;
  double max_side = 3.0;
  long max_attempts = 200000;
};

/// Non-overlapping random boxes inside `bounds` until a ratio drawn from the
/// class band is reached. Boxes never intersect any `keep_clear` region.
Environment generate_environment(Complexity c, const Aabb& bounds, std::uint64_t seed,
                                 const std::vector<Aabb>& keep_clear = {},
                                 const EnvironmentParams& params = {});

struct StructurePose {
  Vec3 position = Vec3::Zero();  // contact-point centroid in world frame
  double yaw = 0.0;
  bool operator==(const StructurePose&) const = default;
};

struct Scenario {
  std::string id;
  RobotModel model = RobotModel::make_default();
  int team = 3;
  Structure structure;
  std::vector<ManifoldSpec> manifolds;
  Environment environment;
  StructurePose start;
  StructurePose goal;
  std::uint64_t seed = 0;
  double keep_clear_margin = 1.0;

  /// Contact count, manifold applicability and geometry; throws StructuralError.
  void validate() const;
  ConstraintSystem system() const;

  /// Team holding the structure at `pose`: each end-effector on its contact,
  /// base yaw equal to the structure yaw, arms at zero.
  SystemConfiguration configuration_at(const StructurePose& pose) const;

  /// Padded boxes around the start and goal formations.
  std::vector<Aabb> keep_clear() const;

  /// Same scenario with a freshly generated environment.
  Scenario with_environment(Complexity c, std::uint64_t env_seed,
                            const EnvironmentParams& params = {}) const;

  bool operator==(const Scenario& o) const;
};

/// T_3, S_3, S_4, I_5, S_5, S_6.
const std::vector<std::string>& reference_ids();
Scenario reference_scenario(const std::string& id);

nlohmann::json to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

nlohmann::json to_json(const SystemConfiguration& q);
SystemConfiguration configuration_from_json(const nlohmann::json& j, const std::string& where);

}  // namespace cnkz
