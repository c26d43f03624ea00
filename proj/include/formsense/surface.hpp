#pragma once

#include <array>
#include <optional>
#include <vector>

#include "formsense/appeal.hpp"
#include "json.hpp"

namespace formsense {

/// Appeal model restricted to a fixed d1: a quadratic in (d2, d3).
struct ResponseSurface {
  double fixed_d1 = 0.0;
  double c0 = 0.0;
  double c_d2 = 0.0;
  double c_d3 = 0.0;
  double c_d2_sq = 0.0;
  double c_d3_sq = 0.0;
  double c_d2d3 = 0.0;

  double operator()(double d2, double d3) const {
    return c0 + c_d2 * d2 + c_d3 * d3 + c_d2_sq * d2 * d2 + c_d3_sq * d3 * d3 + c_d2d3 * d2 * d3;
  }
  /// (dP/dd2, dP/dd3)
  std::array<double, 2> gradient(double d2, double d3) const {
    return {c_d2 + 2.0 * c_d2_sq * d2 + c_d2d3 * d3, c_d3 + 2.0 * c_d3_sq * d3 + c_d2d3 * d2};
  }
};

ResponseSurface response_surface(const AppealModel& model, double fixed_d1);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Raster of the surface. Sample ix sits at d2.lo + ix * (d2.hi - d2.lo) / (nx - 1),
/// or at the interval midpoint when nx = 1; likewise for d3.
struct SurfaceGrid {
  Interval d2, d3;
  int nx = 0;
  int ny = 0;
  std::vector<double> values;  // row-major, values[iy * nx + ix]

  double d2_at(int ix) const;
  double d3_at(int iy) const;
  double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx + ix]; }
  double min() const;
  double max() const;
};

/// Rows are evaluated in parallel.
SurfaceGrid surface_grid(const ResponseSurface& surface, Interval d2, Interval d3, int nx, int ny);
/// Serial reference of surface_grid.
SurfaceGrid surface_grid_reference(const ResponseSurface& surface, Interval d2, Interval d3, int nx, int ny);

using Polyline = std::vector<std::array<double, 2>>;  // (d2, d3) points

struct IsoLevel {
  double level = 0.0;
  bool empty = false;              // level outside the surface's range on the region
  std::vector<Polyline> polylines;
  /// Slope dd3/dd2 of the orthogonal least-squares line through all points of
  /// the level; empty when the level is empty or the fitted line is vertical.
  std::optional<double> slope;
};

struct GradientSample {
  double d2 = 0.0;
  double d3 = 0.0;
  std::array<double, 2> gradient{};
  /// Local iso-line slope dd3/dd2 = -g2 / g3; empty where g3 = 0.
  std::optional<double> iso_slope;
};

struct IsoAnalysis {
  std::vector<IsoLevel> levels;
  std::vector<GradientSample> gradient_field;
};

/// Marching squares on a `resolution` x `resolution` raster of the region, plus
/// the gradient on a `field_resolution` square lattice.
IsoAnalysis iso_appeal_lines(const ResponseSurface& surface, const std::vector<double>& levels, Interval d2,
                             Interval d3, int resolution = 101, int field_resolution = 9);

nlohmann::json surface_json(const ResponseSurface& surface);
nlohmann::json iso_json(const IsoAnalysis& iso);
/// `d2,d3,appeal` rows.
std::string grid_csv(const SurfaceGrid& grid);
/// `level,line,d2,d3` rows.
std::string iso_csv(const IsoAnalysis& iso);

}  // namespace formsense
