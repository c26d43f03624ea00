#include "formsense/plots.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "formsense/io.hpp"
#include "formsense/svg.hpp"

namespace formsense {

namespace {

constexpr double kWidth = 560, kHeight = 500;

svg::Frame perceptual_frame(const PerceptualConfiguration& config) {
  double extent = 0.0;
  for (int i = 0; i < config.n(); ++i)
    for (int c = 0; c < std::min(2, config.k()); ++c) extent = std::max(extent, std::abs(config.points(i, c)));
  extent = extent > 0.0 ? 1.15 * extent : 1.0;
  svg::Frame f;
  f.x_lo = f.y_lo = -extent;
  f.x_hi = f.y_hi = extent;
  return f;
}

double coord(const PerceptualConfiguration& config, int i, int c) { return c < config.k() ? config.points(i, c) : 0.0; }

void scatter(svg::Document& doc, const svg::Frame& f, const PerceptualConfiguration& config, const AppealScores& appeal) {
  double lo = 0.0, hi = 10.0;
  if (!appeal.empty()) {
    lo = hi = appeal.begin()->second;
    for (const auto& [id, v] : appeal) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  for (int i = 0; i < config.n(); ++i) {
    const double x = f.x(coord(config, i, 0)), y = f.y(coord(config, i, 1));
    const auto it = appeal.find(i + 1);
    std::string fill = "#1f3a5f";
    if (it != appeal.end()) fill = svg::hex(svg::palette(hi > lo ? (it->second - lo) / (hi - lo) : 0.5));
    doc.circle(x, y, 5, fill, "stroke=\"#222222\" stroke-width=\"0.8\"");
    doc.text(x + 7, y - 6, std::to_string(i + 1), 11);
  }
}

void origin_cross(svg::Document& doc, const svg::Frame& f) {
  doc.line(f.x(f.x_lo), f.y(0), f.x(f.x_hi), f.y(0), "#bbbbbb", 0.8, "stroke-dasharray=\"4 3\"");
  doc.line(f.x(0), f.y(f.y_lo), f.x(0), f.y(f.y_hi), "#bbbbbb", 0.8, "stroke-dasharray=\"4 3\"");
}

// Clips the line p + t u to the frame's data rectangle.
std::optional<std::array<std::array<double, 2>, 2>> clip(const double p[2], const double u[2], const svg::Frame& f) {
  double t0 = -1e300, t1 = 1e300;
  const double lo[2]{f.x_lo, f.y_lo}, hi[2]{f.x_hi, f.y_hi};
  for (int c = 0; c < 2; ++c) {
    if (u[c] == 0.0) {
      if (p[c] < lo[c] || p[c] > hi[c]) return std::nullopt;
      continue;
    }
    double a = (lo[c] - p[c]) / u[c], b = (hi[c] - p[c]) / u[c];
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
  }
  if (t0 >= t1) return std::nullopt;
  return std::array<std::array<double, 2>, 2>{{{p[0] + t0 * u[0], p[1] + t0 * u[1]}, {p[0] + t1 * u[0], p[1] + t1 * u[1]}}};
}

svg::Frame design_frame(Interval d2, Interval d3) {
  svg::Frame f;
  f.x_lo = d2.lo;
  f.x_hi = d2.hi > d2.lo ? d2.hi : d2.lo + 1.0;
  f.y_lo = d3.lo;
  f.y_hi = d3.hi > d3.lo ? d3.hi : d3.lo + 1.0;
  return f;
}

void design_markers(svg::Document& doc, const svg::Frame& f, const std::vector<DesignParams>& points) {
  for (const auto& p : points) {
    if (p.d2 < f.x_lo || p.d2 > f.x_hi || p.d3 < f.y_lo || p.d3 > f.y_hi) continue;
    doc.circle(f.x(p.d2), f.y(p.d3), 3.5, "#ffffff", "stroke=\"#000000\" stroke-width=\"1\"");
  }
}

}  // namespace

std::string perceptual_map_svg(const PerceptualConfiguration& config, const AppealScores& appeal) {
  svg::Document doc(kWidth, kHeight, "Perceptual space");
  const auto f = perceptual_frame(config);
  origin_cross(doc, f);
  scatter(doc, f, config, appeal);
  doc.axes(f, "axis 1", "axis 2");
  doc.text(f.left, 20, "Perceptual space, stress " + format_fixed(config.stress, 4), 13);
  return doc.str();
}

std::string appeal_vector_svg(const PerceptualConfiguration& config, const VectorModelFit& fit,
                              const AppealVectorPlot& plot) {
  svg::Document doc(kWidth, kHeight, "Appeal vector");
  const auto f = perceptual_frame(config);
  origin_cross(doc, f);
  for (const auto& iso : plot.iso_lines) {
    const auto seg = clip(iso.point, iso.direction, f);
    if (!seg) continue;
    doc.line(f.x((*seg)[0][0]), f.y((*seg)[0][1]), f.x((*seg)[1][0]), f.y((*seg)[1][1]), "#8a8a8a", 1.0,
             "stroke-dasharray=\"6 4\"");
    // Label at the end nearer the top-right corner.
    const auto& end = (*seg)[1][1] > (*seg)[0][1] ? (*seg)[1] : (*seg)[0];
    doc.text(f.x(end[0]) + 3, f.y(end[1]) + 12, "P=" + format_number(iso.level), 10, "start", "fill=\"#555555\"");
  }
  scatter(doc, f, config, {});
  const double reach = 0.8 * f.x_hi;
  doc.arrow(f.x(0), f.y(0), f.x(reach * plot.direction[0]), f.y(reach * plot.direction[1]), "#c0392b", 2.5);
  doc.axes(f, "axis 1", "axis 2");
  doc.text(f.left, 20,
           "P = " + format_fixed(fit.a, 3) + " x1 + " + format_fixed(fit.b, 3) + " x2 + " + format_fixed(fit.c, 3) +
               ", R2 = " + format_fixed(fit.r_squared, 3),
           13);
  return doc.str();
}

std::string colormap_svg(const SurfaceGrid& grid, double fixed_d1, const std::vector<DesignParams>& design_points) {
  svg::Document doc(kWidth + 60, kHeight, "Appeal colormap");
  const auto f = design_frame(grid.d2, grid.d3);
  const double lo = grid.min(), hi = grid.max();
  const double cw = f.width / grid.nx, ch = f.height / grid.ny;
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      const double t = hi > lo ? (grid.at(ix, iy) - lo) / (hi - lo) : 0.5;
      // One tile per sample; the small overlap hides anti-aliasing seams.
      doc.rect(f.left + ix * cw, f.top + (grid.ny - 1 - iy) * ch, cw + 0.3, ch + 0.3, svg::hex(svg::palette(t)));
    }
  design_markers(doc, f, design_points);
  doc.axes(f, "d2 (cm)", "d3 (cm)");
  const double bx = f.left + f.width + 25, bw = 18;
  constexpr int kSteps = 50;
  for (int s = 0; s < kSteps; ++s) {
    const double t = (s + 0.5) / kSteps;
    doc.rect(bx, f.top + f.height * (1.0 - (s + 1.0) / kSteps), bw, f.height / kSteps + 0.3, svg::hex(svg::palette(t)));
  }
  doc.rect(bx, f.top, bw, f.height, "none", "stroke=\"#333333\" stroke-width=\"1\"");
  doc.text(bx + bw + 4, f.top + 10, format_fixed(hi, 2), 11);
  doc.text(bx + bw + 4, f.top + f.height, format_fixed(lo, 2), 11);
  doc.text(f.left, 20, "Appeal over (d2, d3) at d1 = " + format_number(fixed_d1) + " cm", 13);
  return doc.str();
}

std::string iso_lines_svg(const IsoAnalysis& iso, Interval d2, Interval d3,
                          const std::vector<DesignParams>& design_points) {
  svg::Document doc(kWidth, kHeight, "Iso-appeal lines");
  const auto f = design_frame(d2, d3);
  const std::size_t count = iso.levels.size();
  for (std::size_t k = 0; k < count; ++k) {
    const auto& level = iso.levels[k];
    const auto colour = svg::hex(svg::palette(count > 1 ? static_cast<double>(k) / (count - 1) : 0.5));
    for (const auto& line : level.polylines) {
      std::vector<std::array<double, 2>> px;
      for (const auto& p : line) px.push_back({f.x(p[0]), f.y(p[1])});
      doc.polyline(px, colour, 1.8);
    }
    if (!level.polylines.empty()) {
      const auto& mid = level.polylines.front()[level.polylines.front().size() / 2];
      doc.text(f.x(mid[0]) + 4, f.y(mid[1]) - 4, format_number(level.level), 10);
    }
  }
  double gmax = 0.0;
  for (const auto& g : iso.gradient_field) gmax = std::max(gmax, std::hypot(g.gradient[0], g.gradient[1]));
  if (gmax > 0.0) {
    // Arrows in pixel space, longest one a fixed length, pointing towards higher appeal.
    for (const auto& g : iso.gradient_field) {
      const double sx = f.width / (f.x_hi - f.x_lo), sy = f.height / (f.y_hi - f.y_lo);
      double vx = g.gradient[0] * sx, vy = -g.gradient[1] * sy;
      const double len = std::hypot(vx, vy);
      if (len == 0.0) continue;
      const double scale = 22.0 * std::hypot(g.gradient[0], g.gradient[1]) / gmax / len;
      vx *= scale;
      vy *= scale;
      const double x = f.x(g.d2), y = f.y(g.d3);
      doc.arrow(x, y, x + vx, y + vy, "#555555", 1.0);
    }
  }
  design_markers(doc, f, design_points);
  doc.axes(f, "d2 (cm)", "d3 (cm)");
  doc.text(f.left, 20, "Iso-appeal lines and steepest ascent", 13);
  return doc.str();
}

}  // namespace formsense
