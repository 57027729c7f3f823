#include "cnkz/summarize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace cnkz {

namespace {

std::string ms(const MeanStd& m) { return fmt::format("{:.3f} ± {:.3f} ms", 1e3 * m.mean, 1e3 * m.std); }

template <typename Cell>
std::vector<Method> methods_in(const std::vector<Cell>& cells) {
  std::vector<Method> out;
  for (const auto& c : cells) {
    if (std::find(out.begin(), out.end(), c.method) == out.end()) out.push_back(c.method);
  }
  return out;
}

}  // namespace

std::string render_projection_table(const std::vector<ProjectionCell>& cells) {
  if (cells.empty()) return {};
  const auto methods = methods_in(cells);
  std::vector<std::pair<std::string, double>> rows;
  std::map<std::string, std::size_t> dims;
  for (const auto& c : cells) {
    const auto key = std::make_pair(c.set, c.threshold_scale);
    if (std::find(rows.begin(), rows.end(), key) == rows.end()) rows.push_back(key);
    dims[c.set] = c.rows;
  }
  std::ostringstream out;
  out << "| Manifolds | l | Threshold scale |";
  for (Method m : methods) out << ' ' << to_string(m) << " |";
  out << "\n|---|---|---|";
  for (std::size_t i = 0; i < methods.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& [set, scale] : rows) {
    out << fmt::format("| {} | {} | {} |", set, dims[set] ? std::to_string(dims[set]) : "?", scale);
    for (Method m : methods) {
      auto it = std::find_if(cells.begin(), cells.end(), [&](const ProjectionCell& c) {
        return c.set == set && c.threshold_scale == scale && c.method == m;
      });
      if (it == cells.end()) {
        out << " -- |";
      } else if (it->successes == 0) {
        out << fmt::format(" {:.1f}% / -- |", it->success_rate);
      } else {
        out << fmt::format(" {:.1f}% / {} / {:.1f} updates |", it->success_rate, ms(it->time_s),
                           it->updates.mean);
      }
    }
    out << '\n';
  }
  out << "\nEach cell: success rate / mean ± std time of successful trials / mean single-row "
         "updates (NR and CIM: iterations).\n";
  return out.str();
}

std::string render_planning_table(const std::vector<PlanningCell>& cells) {
  if (cells.empty()) return {};
  const auto methods = methods_in(cells);
  std::vector<std::string> scenarios;
  std::vector<Complexity> levels;
  for (const auto& c : cells) {
    if (std::find(scenarios.begin(), scenarios.end(), c.scenario) == scenarios.end()) scenarios.push_back(c.scenario);
    if (std::find(levels.begin(), levels.end(), c.complexity) == levels.end()) levels.push_back(c.complexity);
  }
  std::sort(levels.begin(), levels.end());
  std::ostringstream out;
  out << "| Structure | Complexity |";
  for (Method m : methods) out << ' ' << to_string(m) << " success % | " << to_string(m) << " per projection |";
  out << "\n|---|---|";
  for (std::size_t i = 0; i < methods.size(); ++i) out << "---|---|";
  out << '\n';
  for (const auto& s : scenarios) {
    for (Complexity cx : levels) {
      std::string label = s;
      for (const auto& c : cells) {
        if (c.scenario == s && c.dof > 0) label = fmt::format("{} (R^{} → R^{})", s, c.dof, c.rows);
      }
      out << fmt::format("| {} | {} |", label, to_string(cx));
      for (Method m : methods) {
        auto it = std::find_if(cells.begin(), cells.end(), [&](const PlanningCell& c) {
          return c.scenario == s && c.complexity == cx && c.method == m;
        });
        if (it == cells.end()) {
          out << " -- | -- |";
        } else if (it->successes == 0) {
          out << fmt::format(" {:.1f} | -- |", it->success_rate);
        } else {
          out << fmt::format(" {:.1f} | {} / {:.1f} updates |", it->success_rate,
                             ms(it->time_per_projection_s), it->updates_per_projection.mean);
        }
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string summarize(const std::vector<ProjectionTrial>& projection,
                      const std::vector<PlanningTrial>& planning) {
  std::string out;
  if (!projection.empty()) {
    std::vector<std::string> order;
    for (const auto& t : projection) {
      if (std::find(order.begin(), order.end(), t.set) == order.end()) order.push_back(t.set);
    }
    std::vector<std::size_t> rows;
    for (const auto& label : order) {
      std::size_t l = 0;
      for (const auto& set : projection_sets()) {
        if (set.label == label) {
          l = ConstraintSystem::assemble(set.specs, RobotModel::make_default(), 3,
                                         make_structure(StructureKind::Straight, 1.0, 0.5))
                  .rows();
        }
      }
      rows.push_back(l);
    }
    out += "## Projection comparison\n\n" + render_projection_table(aggregate(projection, rows, order));
  }
  if (!planning.empty()) {
    std::vector<Scenario> refs;
    for (const auto& id : reference_ids()) refs.push_back(reference_scenario(id));
    if (!out.empty()) out += '\n';
    out += "## Planning comparison\n\n" + render_planning_table(aggregate(planning, refs));
  }
  return out;
}

std::vector<PlotSeries> trace_series(std::istream& in) {
  std::string line;
  std::getline(in, line);
  PlotSeries norm{"weighted norm", {}, {}};
  std::map<std::string, PlotSeries> per;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() < 7) throw SchemaError("trace csv: expected 7 columns");
    const double step = std::stod(f[0]);
    norm.x.push_back(step);
    norm.y.push_back(std::stod(f[5]));
    auto& s = per[f[2]];
    s.label = f[2] == "all" ? "max |h|" : "|h| " + f[2];
    s.x.push_back(step);
    s.y.push_back(std::abs(std::stod(f[3])));
  }
  std::vector<PlotSeries> out{norm};
  for (auto& [k, s] : per) out.push_back(std::move(s));
  return out;
}

std::vector<std::filesystem::path> summarize_directory(const std::filesystem::path& in_dir,
                                                       const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::vector<ProjectionTrial> projection;
  std::vector<PlanningTrial> planning;
  if (std::ifstream f(in_dir / "projection_trials.csv"); f) projection = read_projection_trials(f);
  if (std::ifstream f(in_dir / "planning_trials.csv"); f) planning = read_planning_trials(f);

  std::vector<fs::path> written;
  fs::create_directories(out_dir);
  {
    const fs::path md = out_dir / "summary.md";
    std::ofstream out(md);
    if (!out) throw SchemaError(md.string() + ": cannot write");
    out << summarize(projection, planning);
    written.push_back(md);
  }
  const fs::path traces = in_dir / "traces";
  if (fs::is_directory(traces)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(traces)) {
      if (e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (!files.empty()) fs::create_directories(out_dir / "plots");
    for (const auto& f : files) {
      std::ifstream in(f);
      const auto series = trace_series(in);
      const fs::path svg = out_dir / "plots" / (f.stem().string() + ".svg");
      std::ofstream out(svg);
      if (!out) throw SchemaError(svg.string() + ": cannot write");
      write_line_plot_svg(series, f.stem().string(), "step", "residual", true, out);
      written.push_back(svg);
    }
  }
  return written;
}

}  // namespace cnkz
