#include "cnkz/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <ostream>


#include "cnkz/collision.hpp"

namespace cnkz {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// World X-Y to pixel coordinates (Y up).
struct View {
  double x0, y0, scale, height, margin;
  double px(double x) const { return margin + (x - x0) * scale; }
  double py(double y) const { return height - margin - (y - y0) * scale; }
};

void polygon(std::ostream& out, const View& v, const Obb& box, const char* fill, double opacity) {
  out << "<polygon points=\"";
  for (auto [sx, sy] : {std::pair{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}) {
    const Vec3 p = box.center + box.axes * Vec3(sx * box.half.x(), sy * box.half.y(), 0.0);
    out << fmt::format("{:.2f},{:.2f} ", v.px(p.x()), v.py(p.y()));
  }
  out << fmt::format("\" fill=\"{}\" fill-opacity=\"{}\" stroke=\"#333\" stroke-width=\"0.5\"/>\n",
                     fill, opacity);
}

}  // namespace

void write_path_svg(const Scenario& s, std::span<const SystemConfiguration> waypoints,
                    std::ostream& out, int footprint_every) {
  const Aabb& b = s.environment.bounds;
  const double width_m = b.hi.x() - b.lo.x(), height_m = b.hi.y() - b.lo.y();
  const double scale = 600.0 / std::max(width_m, height_m);
  const double margin = 20.0;
  const View v{b.lo.x(), b.lo.y(), scale, height_m * scale + 2 * margin, margin};
  const double w_px = width_m * scale + 2 * margin;

  out << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "viewBox=\"0 0 {:.0f} {:.0f}\">\n",
      w_px, v.height, w_px, v.height);
  out << fmt::format("<title>{}</title>\n", escape(s.id));
  out << fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
                     "fill=\"white\" stroke=\"black\"/>\n",
                     v.px(b.lo.x()), v.py(b.hi.y()), width_m * scale, height_m * scale);
  out << "<g id=\"obstacles\">\n";
  for (const auto& o : s.environment.obstacles) {
    // Darker for obstacles that reach higher.
    const double shade = std::clamp((o.hi.z() - b.lo.z()) / (b.hi.z() - b.lo.z()), 0.1, 1.0);
    out << fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
                       "fill=\"#555\" fill-opacity=\"{:.2f}\"/>\n",
                       v.px(o.lo.x()), v.py(o.hi.y()), (o.hi.x() - o.lo.x()) * scale,
                       (o.hi.y() - o.lo.y()) * scale, 0.15 + 0.5 * shade);
  }
  out << "</g>\n";

  if (!waypoints.empty()) {
    const CollisionChecker geom(s.model, s.structure, Environment{b, {}, Complexity::None, 0}, 1.0);
    out << "<g id=\"footprints\">\n";
    for (std::size_t k = 0; k < waypoints.size(); ++k) {
      const bool edge = k == 0 || k + 1 == waypoints.size();
      if (!edge && (footprint_every <= 0 || k % std::size_t(footprint_every) != 0)) continue;
      const auto& q = waypoints[k];
      if (s.structure.contacts() == q.robots()) {
        for (const auto& box : geom.structure_boxes(geom.structure_fit(q))) {
          polygon(out, v, box, "#e8a33d", edge ? 0.9 : 0.35);
        }
      }
      for (int i = 0; i < q.robots(); ++i) {
        polygon(out, v, geom.base_box(q.block(i)), kPalette[i % 8], edge ? 0.6 : 0.2);
      }
    }
    out << "</g>\n<g id=\"traces\" fill=\"none\" stroke-width=\"1.5\">\n";
    for (int i = 0; i < waypoints.front().robots(); ++i) {
      out << fmt::format("<polyline stroke=\"{}\" points=\"", kPalette[i % 8]);
      for (const auto& q : waypoints) {
        const auto blk = q.block(i);
        out << fmt::format("{:.2f},{:.2f} ", v.px(blk[dof::kX]), v.py(blk[dof::kY]));
      }
      out << "\"/>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
}

void write_line_plot_svg(std::span<const PlotSeries> series, const std::string& title,
                         const std::string& x_label, const std::string& y_label, bool log_y,
                         std::ostream& out) {
  constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 160, kTop = 40, kBottom = 50;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin, ypos = xmin;
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      xmin = std::min(xmin, s.x[k]);
      xmax = std::max(xmax, s.x[k]);
      ymin = std::min(ymin, s.y[k]);
      ymax = std::max(ymax, s.y[k]);
      if (s.y[k] > 0.0) ypos = std::min(ypos, s.y[k]);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0, ypos = 1.0;
  if (!std::isfinite(ypos)) ypos = 1.0;
  auto ty = [&](double y) { return log_y ? std::log10(std::max(y, ypos)) : y; };
  double y0 = log_y ? ty(ypos) : ymin, y1 = log_y ? ty(std::max(ymax, ypos)) : ymax;
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return kTop + ph - (ty(y) - y0) / (y1 - y0) * ph; };

  out << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
                     "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n",
                     kW, kH);
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                     kLeft + pw / 2, escape(title));
  out << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                     kLeft, kTop, pw, ph);
  for (int t = 0; t <= 4; ++t) {
    const double fx = xmin + (xmax - xmin) * t / 4.0;
    const double fy = y0 + (y1 - y0) * t / 4.0;
    const double yv = log_y ? std::pow(10.0, fy) : fy;
    out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.4g}</text>\n",
                       px(fx), kTop + ph + 16, fx);
    out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n",
                       kLeft - 6, kTop + ph - (fy - y0) / (y1 - y0) * ph + 4, yv);
  }
  out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2,
                     kH - 10, escape(x_label));
  out << fmt::format("<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
                     kTop + ph / 2, kTop + ph / 2, escape(y_label + (log_y ? " (log)" : "")));
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ser = series[s];
    const char* color = kPalette[s % 8];
    out << fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"", color);
    for (std::size_t k = 0; k < ser.x.size() && k < ser.y.size(); ++k) {
      out << fmt::format("{:.2f},{:.2f} ", px(ser.x[k]), py(ser.y[k]));
    }
    out << "\"/>\n";
    const double ly = kTop + 10 + 18.0 * double(s);
    out << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                       kLeft + pw + 10, ly, kLeft + pw + 30, color);
    out << fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kLeft + pw + 36, ly + 4, escape(ser.label));
  }
  out << "</svg>\n";
}

}  // namespace cnkz
