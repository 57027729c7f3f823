#pragma once

// Path files (schema "cnkz.path/1"): the scenario, planner parameters, seed,
// waypoints with their unweighted residual rows, and planner statistics.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "cnkz/planner.hpp"
#include "cnkz/scenarios.hpp"

namespace cnkz {

nlohmann::json to_json(const SolverParams& p);
SolverParams solver_params_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json to_json(const PlannerParams& p);
PlannerParams planner_params_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json to_json(const PlanStats& s);

/// Projection report; wall time is only included when `timing` is set.
nlohmann::json to_json(const ConstraintSystem& sys, const ProjectionReport& r, bool timing = true);

struct PathFile {
  Scenario scenario;
  PlannerParams params;
  std::vector<SystemConfiguration> waypoints;
  std::vector<std::vector<double>> residuals;
  nlohmann::json stats;
};

/// Throws StructuralError when the plan failed.
nlohmann::json path_to_json(const Scenario& s, const PlanResult& r, const PlannerParams& p);
PathFile path_from_json(const nlohmann::json& j);

void export_path(const Scenario& s, const PlanResult& r, const PlannerParams& p,
                 const std::filesystem::path& file);
PathFile import_path(const std::filesystem::path& file);

}  // namespace cnkz
