#pragma once

// Markdown tables and residual plots from benchmark outputs. Cells without a
// successful trial show "--" in place of their timing and update statistics.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cnkz/bench.hpp"
#include "cnkz/svg.hpp"

namespace cnkz {

std::string render_projection_table(const std::vector<ProjectionCell>& cells);
std::string render_planning_table(const std::vector<PlanningCell>& cells);

/// Both tables (sections with no trials are omitted; no trials gives "").
std::string summarize(const std::vector<ProjectionTrial>& projection,
                      const std::vector<PlanningTrial>& planning);

/// Weighted norm plus per-manifold |residual| of the visited row, by step.
std::vector<PlotSeries> trace_series(std::istream& trace_csv);

/// Reads projection_trials.csv, planning_trials.csv and traces/*.csv from
/// `in_dir` (each optional) and writes summary.md plus plots/*.svg to
/// `out_dir`. Returns the written files.
std::vector<std::filesystem::path> summarize_directory(const std::filesystem::path& in_dir,
                                                       const std::filesystem::path& out_dir);

}  // namespace cnkz
