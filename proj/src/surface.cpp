#include "formsense/surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <unordered_map>

#include "formsense/error.hpp"
#include "formsense/io.hpp"

namespace formsense {

ResponseSurface response_surface(const AppealModel& model, double fixed_d1) {
  if (!(fixed_d1 > 0.0)) throw RangeError("fixed d1 must be strictly positive");
  const auto& a = model.a;
  ResponseSurface s;
  s.fixed_d1 = fixed_d1;
  s.c0 = a[0] * fixed_d1 + a[9] + a[3] * fixed_d1 * fixed_d1;
  s.c_d2 = a[1] + a[6] * fixed_d1;
  s.c_d3 = a[2] + a[7] * fixed_d1;
  s.c_d2_sq = a[4];
  s.c_d3_sq = a[5];
  s.c_d2d3 = a[8];
  return s;
}

namespace {

double sample(const Interval& iv, int n, int i) {
  if (n == 1) return 0.5 * (iv.lo + iv.hi);
  return iv.lo + (iv.hi - iv.lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

void check_region(const Interval& d2, const Interval& d3, int nx, int ny) {
  for (const auto* iv : {&d2, &d3})
    if (!std::isfinite(iv->lo) || !std::isfinite(iv->hi) || iv->lo > iv->hi)
      throw RangeError("range must be finite with lo <= hi");
  if (nx < 1 || ny < 1) throw RangeError("grid resolution must be at least 1");
}

SurfaceGrid empty_grid(Interval d2, Interval d3, int nx, int ny) {
  check_region(d2, d3, nx, ny);
  SurfaceGrid g;
  g.d2 = d2;
  g.d3 = d3;
  g.nx = nx;
  g.ny = ny;
  g.values.resize(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  return g;
}

void fill_row(const ResponseSurface& s, SurfaceGrid& g, int iy) {
  const double d3 = g.d3_at(iy);
  for (int ix = 0; ix < g.nx; ++ix) g.values[static_cast<std::size_t>(iy) * g.nx + ix] = s(g.d2_at(ix), d3);
}

}  // namespace

double SurfaceGrid::d2_at(int ix) const { return sample(d2, nx, ix); }
double SurfaceGrid::d3_at(int iy) const { return sample(d3, ny, iy); }
double SurfaceGrid::min() const { return *std::min_element(values.begin(), values.end()); }
double SurfaceGrid::max() const { return *std::max_element(values.begin(), values.end()); }

SurfaceGrid surface_grid(const ResponseSurface& surface, Interval d2, Interval d3, int nx, int ny) {
  auto g = empty_grid(d2, d3, nx, ny);
#pragma omp parallel for schedule(static)
  for (int iy = 0; iy < ny; ++iy) fill_row(surface, g, iy);
  return g;
}

SurfaceGrid surface_grid_reference(const ResponseSurface& surface, Interval d2, Interval d3, int nx, int ny) {
  auto g = empty_grid(d2, d3, nx, ny);
  for (int iy = 0; iy < ny; ++iy) fill_row(surface, g, iy);
  return g;
}

namespace {

// Marching squares. Edge keys: horizontal edge from node (ix, iy) to (ix + 1, iy)
// is 2 * (iy * nx + ix); vertical edge from (ix, iy) to (ix, iy + 1) is that + 1.
class Contour {
 public:
  Contour(const SurfaceGrid& g, double level) : g_(g), level_(level) {}

  std::vector<Polyline> trace() {
    collect_segments();
    std::vector<Polyline> out;
    std::vector<bool> used(segments_.size(), false);
    for (std::size_t s = 0; s < segments_.size(); ++s) {
      if (used[s]) continue;
      used[s] = true;
      std::vector<std::uint64_t> chain{segments_[s][0], segments_[s][1]};
      extend(chain, used);
      std::reverse(chain.begin(), chain.end());
      extend(chain, used);
      Polyline line;
      for (auto e : chain) line.push_back(point(e));
      out.push_back(std::move(line));
    }
    return out;
  }

 private:
  bool inside(int ix, int iy) const { return g_.at(ix, iy) >= level_; }
  std::uint64_t hkey(int ix, int iy) const { return 2u * (static_cast<std::uint64_t>(iy) * g_.nx + ix); }
  std::uint64_t vkey(int ix, int iy) const { return hkey(ix, iy) + 1u; }

  std::array<double, 2> point(std::uint64_t key) const {
    const auto node = key / 2;
    const int ix = static_cast<int>(node % static_cast<std::uint64_t>(g_.nx));
    const int iy = static_cast<int>(node / static_cast<std::uint64_t>(g_.nx));
    const bool vertical = key % 2 == 1;
    const int jx = vertical ? ix : ix + 1;
    const int jy = vertical ? iy + 1 : iy;
    const double va = g_.at(ix, iy), vb = g_.at(jx, jy);
    const double t = (level_ - va) / (vb - va);
    const double d2a = g_.d2_at(ix), d2b = g_.d2_at(jx);
    const double d3a = g_.d3_at(iy), d3b = g_.d3_at(jy);
    return {d2a + t * (d2b - d2a), d3a + t * (d3b - d3a)};
  }

  void add(std::uint64_t a, std::uint64_t b) {
    const auto idx = segments_.size();
    segments_.push_back({a, b});
    by_edge_[a].push_back(idx);
    by_edge_[b].push_back(idx);
  }

  void collect_segments() {
    for (int iy = 0; iy + 1 < g_.ny; ++iy)
      for (int ix = 0; ix + 1 < g_.nx; ++ix) {
        const bool c00 = inside(ix, iy), c10 = inside(ix + 1, iy);
        const bool c11 = inside(ix + 1, iy + 1), c01 = inside(ix, iy + 1);
        const auto bottom = hkey(ix, iy), top = hkey(ix, iy + 1);
        const auto left = vkey(ix, iy), right = vkey(ix + 1, iy);
        std::vector<std::uint64_t> crossed;
        if (c00 != c10) crossed.push_back(bottom);
        if (c10 != c11) crossed.push_back(right);
        if (c11 != c01) crossed.push_back(top);
        if (c01 != c00) crossed.push_back(left);
        if (crossed.size() == 2) {
          add(crossed[0], crossed[1]);
        } else if (crossed.size() == 4) {
          // Saddle: cut off the two corners whose side differs from the cell centre.
          const double centre =
              0.25 * (g_.at(ix, iy) + g_.at(ix + 1, iy) + g_.at(ix + 1, iy + 1) + g_.at(ix, iy + 1));
          const bool c = centre >= level_;
          if (c00 != c) add(bottom, left);
          if (c10 != c) add(bottom, right);
          if (c11 != c) add(right, top);
          if (c01 != c) add(left, top);
        }
      }
  }

  void extend(std::vector<std::uint64_t>& chain, std::vector<bool>& used) const {
    for (;;) {
      const auto it = by_edge_.find(chain.back());
      bool grown = false;
      for (auto s : it->second) {
        if (used[s]) continue;
        used[s] = true;
        chain.push_back(segments_[s][0] == chain.back() ? segments_[s][1] : segments_[s][0]);
        grown = true;
        break;
      }
      if (!grown) return;
    }
  }

  const SurfaceGrid& g_;
  double level_;
  std::vector<std::array<std::uint64_t, 2>> segments_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_edge_;
};

std::optional<double> orthogonal_slope(const std::vector<Polyline>& lines) {
  double n = 0.0, mx = 0.0, my = 0.0;
  for (const auto& l : lines)
    for (const auto& p : l) {
      n += 1.0;
      mx += p[0];
      my += p[1];
    }
  if (n < 2.0) return std::nullopt;
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& l : lines)
    for (const auto& p : l) {
      sxx += (p[0] - mx) * (p[0] - mx);
      syy += (p[1] - my) * (p[1] - my);
      sxy += (p[0] - mx) * (p[1] - my);
    }
  if (sxx == 0.0 && syy == 0.0) return std::nullopt;
  const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  if (std::abs(std::cos(theta)) < 1e-12) return std::nullopt;
  return std::tan(theta);
}

}  // namespace

IsoAnalysis iso_appeal_lines(const ResponseSurface& surface, const std::vector<double>& levels, Interval d2,
                             Interval d3, int resolution, int field_resolution) {
  if (resolution < 2) throw RangeError("iso-line resolution must be at least 2");
  if (field_resolution < 1) throw RangeError("gradient field resolution must be at least 1");
  const auto grid = surface_grid(surface, d2, d3, resolution, resolution);
  const double lo = grid.min(), hi = grid.max();
  IsoAnalysis out;
  for (double level : levels) {
    IsoLevel iso;
    iso.level = level;
    if (level >= lo && level <= hi) iso.polylines = Contour(grid, level).trace();
    iso.empty = iso.polylines.empty();
    if (!iso.empty) iso.slope = orthogonal_slope(iso.polylines);
    out.levels.push_back(std::move(iso));
  }
  for (int iy = 0; iy < field_resolution; ++iy)
    for (int ix = 0; ix < field_resolution; ++ix) {
      GradientSample g;
      g.d2 = sample(d2, field_resolution, ix);
      g.d3 = sample(d3, field_resolution, iy);
      g.gradient = surface.gradient(g.d2, g.d3);
      if (g.gradient[1] != 0.0) g.iso_slope = -g.gradient[0] / g.gradient[1];
      out.gradient_field.push_back(g);
    }
  return out;
}

nlohmann::json surface_json(const ResponseSurface& s) {
  return {{"fixed_d1", s.fixed_d1}, {"c0", s.c0},           {"c_d2", s.c_d2},     {"c_d3", s.c_d3},
          {"c_d2^2", s.c_d2_sq},    {"c_d3^2", s.c_d3_sq}, {"c_d2*d3", s.c_d2d3}};
}

nlohmann::json iso_json(const IsoAnalysis& iso) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : iso.levels) {
    std::size_t points = 0;
    for (const auto& p : l.polylines) points += p.size();
    levels.push_back({{"level", l.level},
                      {"empty", l.empty},
                      {"polylines", l.polylines.size()},
                      {"points", points},
                      {"slope", opt(l.slope)}});
  }
  nlohmann::json field = nlohmann::json::array();
  for (const auto& g : iso.gradient_field)
    field.push_back({{"d2", g.d2}, {"d3", g.d3}, {"gradient", g.gradient}, {"iso_slope", opt(g.iso_slope)}});
  return {{"levels", levels}, {"gradient_field", field}};
}

std::string grid_csv(const SurfaceGrid& grid) {
  std::ostringstream out;
  out << "d2,d3,appeal\n";
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix)
      out << format_number(grid.d2_at(ix)) << ',' << format_number(grid.d3_at(iy)) << ','
          << format_number(grid.at(ix, iy)) << '\n';
  return out.str();
}

std::string iso_csv(const IsoAnalysis& iso) {
  std::ostringstream out;
  out << "level,line,d2,d3\n";
  for (const auto& l : iso.levels)
    for (std::size_t k = 0; k < l.polylines.size(); ++k)
      for (const auto& p : l.polylines[k])
        out << format_number(l.level) << ',' << k << ',' << format_number(p[0]) << ',' << format_number(p[1]) << '\n';
  return out.str();
}

}  // namespace formsense
