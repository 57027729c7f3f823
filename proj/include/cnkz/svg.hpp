#pragma once

// Write-only SVG output: top-down (X-Y) path renderings and line plots.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cnkz/scenarios.hpp"

namespace cnkz {

/// Obstacles, robot base traces, structure footprints at the first and last
/// waypoint (and every `footprint_every` waypoints in between, 0 disables).
void write_path_svg(const Scenario& s, std::span<const SystemConfiguration> waypoints,
                    std::ostream& out, int footprint_every = 0);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Line plot; with log_y, non-positive values are clamped to the smallest
/// positive value present.
void write_line_plot_svg(std::span<const PlotSeries> series, const std::string& title,
                         const std::string& x_label, const std::string& y_label, bool log_y,
                         std::ostream& out);

}  // namespace cnkz
