#include "formsense/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "formsense/error.hpp"
#include "formsense/io.hpp"
#include "json.hpp"

namespace formsense {

namespace {

ProfilePoint operator+(ProfilePoint a, ProfilePoint b) { return {a.r + b.r, a.z + b.z}; }
ProfilePoint operator-(ProfilePoint a, ProfilePoint b) { return {a.r - b.r, a.z - b.z}; }
ProfilePoint operator*(double s, ProfilePoint a) { return {s * a.r, s * a.z}; }

ProfilePoint normalized(ProfilePoint v) {
  const double len = std::hypot(v.r, v.z);
  return len > 0.0 ? ProfilePoint{v.r / len, v.z / len} : v;
}

// Interpolating cubic spline through the nodes with unit parameter spacing.
// Each end is clamped to a given derivative or left natural.
class CubicSection {
 public:
  CubicSection(std::vector<ProfilePoint> nodes, const ProfilePoint* start_derivative,
               const ProfilePoint* end_derivative)
      : q_(std::move(nodes)), m_(q_.size()) {
    const std::size_t n = q_.size();
    if (n < 2) throw InvalidInput("spline section needs at least 2 nodes");
    // Tridiagonal system for the second derivatives, solved per coordinate.
    std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0);
    std::vector<ProfilePoint> rhs(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      lower[i] = 1.0;
      diag[i] = 4.0;
      upper[i] = 1.0;
      rhs[i] = 6.0 * (q_[i + 1] - 2.0 * q_[i] + q_[i - 1]);
    }
    if (start_derivative != nullptr) {
      diag[0] = 2.0;
      upper[0] = 1.0;
      rhs[0] = 6.0 * (q_[1] - q_[0] - *start_derivative);
    } else {
      diag[0] = 1.0;
    }
    if (end_derivative != nullptr) {
      diag[n - 1] = 2.0;
      lower[n - 1] = 1.0;
      rhs[n - 1] = 6.0 * (*end_derivative - (q_[n - 1] - q_[n - 2]));
    } else {
      diag[n - 1] = 1.0;
    }
    for (std::size_t i = 1; i < n; ++i) {
      const double w = lower[i] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] = rhs[i] - w * rhs[i - 1];
    }
    m_[n - 1] = (1.0 / diag[n - 1]) * rhs[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) m_[i] = (1.0 / diag[i]) * (rhs[i] - upper[i] * m_[i + 1]);
  }

  std::size_t segments() const { return q_.size() - 1; }

  ProfilePoint eval(double u) const {
    auto [i, t] = locate(u);
    const double a = 1.0 - t;
    return a * q_[i] + t * q_[i + 1] + (1.0 / 6.0) * ((a * a * a - a) * m_[i] + (t * t * t - t) * m_[i + 1]);
  }

  ProfilePoint derivative(double u) const {
    auto [i, t] = locate(u);
    const double a = 1.0 - t;
    return q_[i + 1] - q_[i] + (1.0 / 6.0) * ((1.0 - 3.0 * a * a) * m_[i] + (3.0 * t * t - 1.0) * m_[i + 1]);
  }

  /// Samples at u = k / samples_per_segment, end point included.
  std::vector<double> sample_parameters(int samples_per_segment) const {
    std::vector<double> us;
    const int total = static_cast<int>(segments()) * samples_per_segment;
    for (int k = 0; k <= total; ++k) us.push_back(static_cast<double>(k) / samples_per_segment);
    return us;
  }

 private:
  std::pair<std::size_t, double> locate(double u) const {
    const double last = static_cast<double>(segments());
    u = std::clamp(u, 0.0, last);
    std::size_t i = static_cast<std::size_t>(std::floor(u));
    if (i >= segments()) i = segments() - 1;
    return {i, u - static_cast<double>(i)};
  }

  std::vector<ProfilePoint> q_;
  std::vector<ProfilePoint> m_;
};

double cross(ProfilePoint a, ProfilePoint b) { return a.r * b.z - a.z * b.r; }

bool segments_intersect(ProfilePoint p1, ProfilePoint p2, ProfilePoint q1, ProfilePoint q2) {
  if (std::max(p1.r, p2.r) < std::min(q1.r, q2.r) || std::max(q1.r, q2.r) < std::min(p1.r, p2.r) ||
      std::max(p1.z, p2.z) < std::min(q1.z, q2.z) || std::max(q1.z, q2.z) < std::min(p1.z, p2.z))
    return false;
  const double d1 = cross(p2 - p1, q1 - p1), d2 = cross(p2 - p1, q2 - p1);
  const double d3 = cross(q2 - q1, p1 - q1), d4 = cross(q2 - q1, p2 - q1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

bool self_intersects(const std::vector<ProfilePoint>& chain) {
  const std::size_t n = chain.size();
  for (std::size_t a = 0; a + 1 < n; ++a)
    for (std::size_t b = a + 2; b + 1 < n; ++b)
      if (segments_intersect(chain[a], chain[a + 1], chain[b], chain[b + 1])) return true;
  return false;
}

}  // namespace

void ProfileTemplate::validate() const {
  if (!(foot_start > 0 && foot_start < container_start && container_start + 1 < kTemplateNodes))
    throw InvalidInput("template sections must satisfy 0 < foot_start < container_start < 14");
  if (nodes[0].r != 0.0 || nodes[0].z != 0.0) throw InvalidInput("template node 1 must be on the axis at z = 0");
  for (std::size_t k = 1; k < kTemplateNodes; ++k)
    if (!(nodes[k].r > 0.0)) throw InvalidInput("template nodes after the first must have r > 0");
  for (std::size_t k = foot_start; k < container_start; ++k)
    if (nodes[k + 1].z < nodes[k].z) throw InvalidInput("foot node heights must be nondecreasing");
  if (!(nodes[container_start].z > nodes[foot_start].z)) throw InvalidInput("foot must have positive height");
  if (std::hypot(foot_tangent.r, foot_tangent.z) == 0.0 || std::hypot(container_tangent.r, container_tangent.z) == 0.0)
    throw InvalidInput("junction tangents must be nonzero");
}

ProfileTemplate canonical_template() {
  ProfileTemplate t;
  t.name = "balloon";
  t.nodes = {{{0.0, 0.0}, {1.9, 0.02}, {3.1, 0.12}, {1.6, 0.42}, {0.38, 0.8},
              {0.3, 2.3}, {0.28, 3.8}, {0.32, 5.3},
              {0.6, 5.8}, {2.2, 6.35}, {3.5, 7.8}, {4.0, 9.5}, {3.8, 11.2}, {3.35, 12.6}, {3.0, 13.8}}};
  t.foot_start = 4;
  t.container_start = 8;
  t.start_tangent = {1.2, 0.0};
  t.foot_tangent = {0.0, 1.0};
  t.container_tangent = {1.2, 0.0};
  return t;
}

ProfileTemplate load_template(std::string_view json_text) {
  try {
    const auto j = nlohmann::json::parse(json_text);
    ProfileTemplate t;
    t.name = j.value("name", std::string("template"));
    const auto& nodes = j.at("nodes");
    if (nodes.size() != kTemplateNodes) throw InvalidInput("template must have exactly 15 nodes");
    for (std::size_t k = 0; k < kTemplateNodes; ++k)
      t.nodes[k] = {nodes[k].at(0).get<double>(), nodes[k].at(1).get<double>()};
    t.foot_start = j.at("foot_start").get<std::size_t>();
    t.container_start = j.at("container_start").get<std::size_t>();
    const auto& tan = j.at("tangents");
    auto pt = [](const nlohmann::json& v) { return ProfilePoint{v.at(0).get<double>(), v.at(1).get<double>()}; };
    t.start_tangent = pt(tan.at("start"));
    t.foot_tangent = pt(tan.at("foot_start"));
    t.container_tangent = pt(tan.at("container_start"));
    t.validate();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed template json: ") + e.what());
  }
}

std::string serialize_template(const ProfileTemplate& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& p : t.nodes) nodes.push_back({p.r, p.z});
  nlohmann::json j = {{"name", t.name},
                      {"nodes", nodes},
                      {"foot_start", t.foot_start},
                      {"container_start", t.container_start},
                      {"tangents",
                       {{"start", {t.start_tangent.r, t.start_tangent.z}},
                        {"foot_start", {t.foot_tangent.r, t.foot_tangent.z}},
                        {"container_start", {t.container_tangent.r, t.container_tangent.z}}}}};
  return j.dump(2) + "\n";
}

double GlassShape::container_height() const {
  const auto c = container();
  const auto [lo, hi] = std::minmax_element(c.begin(), c.end(), [](auto a, auto b) { return a.z < b.z; });
  return hi->z - lo->z;
}

double GlassShape::max_container_diameter() const {
  const auto c = container();
  return 2.0 * std::max_element(c.begin(), c.end(), [](auto a, auto b) { return a.r < b.r; })->r;
}

double GlassShape::max_diameter() const {
  return 2.0 * std::max_element(outer.begin(), outer.end(), [](auto a, auto b) { return a.r < b.r; })->r;
}

double GlassShape::height() const {
  double lo = outer.front().z, hi = outer.front().z;
  for (const auto* curve : {&outer, &inner})
    for (const auto& p : *curve) {
      lo = std::min(lo, p.z);
      hi = std::max(hi, p.z);
    }
  return hi - lo;
}

std::vector<ProfilePoint> GlassShape::closed_profile() const {
  std::vector<ProfilePoint> chain(outer);
  chain.insert(chain.end(), inner.begin(), inner.end());
  return chain;
}

GlassShape generate_profile(const ProfileTemplate& tmpl, const DesignParams& params, int samples_per_segment) {
  tmpl.validate();
  if (!params.positive()) throw RangeError("design parameters must be strictly positive");
  if (samples_per_segment < 1) throw InvalidInput("samples_per_segment must be at least 1");

  const std::size_t fs = tmpl.foot_start, cs = tmpl.container_start;
  const auto section = [&](std::size_t first, std::size_t last) {
    return std::vector<ProfilePoint>(tmpl.nodes.begin() + static_cast<long>(first),
                                     tmpl.nodes.begin() + static_cast<long>(last) + 1);
  };

  // The container is an axis-aligned affine image of the reference container, so
  // its sampled extents scale exactly with the factors below.
  const CubicSection reference(section(cs, kTemplateNodes - 1), &tmpl.container_tangent, nullptr);
  double ref_rmax = 0.0, ref_zmin = tmpl.nodes[cs].z, ref_zmax = tmpl.nodes[cs].z;
  for (double u : reference.sample_parameters(samples_per_segment)) {
    const auto p = reference.eval(u);
    ref_rmax = std::max(ref_rmax, p.r);
    ref_zmin = std::min(ref_zmin, p.z);
    ref_zmax = std::max(ref_zmax, p.z);
  }
  const double radial_scale = 0.5 * params.d3 / ref_rmax;
  const double height_scale = params.d1 / (ref_zmax - ref_zmin);
  if (0.5 * params.d3 <= kWallGap)
    throw DegenerateShape("container diameter " + format_number(params.d3) +
                          " cm is not larger than twice the 0.1 cm wall gap");

  const double base_height = tmpl.base_height();
  const double foot_scale = params.d2 / (tmpl.nodes[cs].z - base_height);
  auto nodes = tmpl.nodes;
  for (std::size_t k = fs + 1; k < cs; ++k) nodes[k].z = base_height + (tmpl.nodes[k].z - base_height) * foot_scale;
  for (std::size_t k = cs; k < kTemplateNodes; ++k)
    nodes[k] = {radial_scale * tmpl.nodes[k].r, base_height + params.d2 + height_scale * (tmpl.nodes[k].z - tmpl.nodes[cs].z)};
  const ProfilePoint container_derivative{radial_scale * tmpl.container_tangent.r,
                                          height_scale * tmpl.container_tangent.z};

  const auto scaled = [&](std::size_t first, std::size_t last) {
    return std::vector<ProfilePoint>(nodes.begin() + static_cast<long>(first), nodes.begin() + static_cast<long>(last) + 1);
  };
  const CubicSection base(scaled(0, fs), &tmpl.start_tangent, &tmpl.foot_tangent);
  const CubicSection foot(scaled(fs, cs), &tmpl.foot_tangent, &container_derivative);
  const CubicSection container(scaled(cs, kTemplateNodes - 1), &container_derivative, nullptr);

  GlassShape shape;
  shape.params = params;
  auto append = [&](const CubicSection& s, bool skip_first) {
    const auto us = s.sample_parameters(samples_per_segment);
    for (std::size_t k = skip_first ? 1 : 0; k < us.size(); ++k) shape.outer.push_back(s.eval(us[k]));
  };
  append(base, false);
  shape.foot_offset = shape.outer.size() - 1;
  append(foot, true);
  shape.container_offset = shape.outer.size() - 1;
  append(container, true);
  shape.outer.front().r = 0.0;  // exactly on the axis

  shape.p5_tangents = {normalized(base.derivative(static_cast<double>(base.segments()))), normalized(foot.derivative(0.0))};
  shape.p9_tangents = {normalized(foot.derivative(static_cast<double>(foot.segments()))),
                       normalized(container.derivative(0.0))};

  // Inner wall: offset along the inward normal, clipped at the rim height.
  const double rim = shape.outer.back().z;
  std::vector<ProfilePoint> inner;
  for (double u : container.sample_parameters(samples_per_segment)) {
    const auto p = container.eval(u);
    const auto t = normalized(container.derivative(u));
    const ProfilePoint q = p + kWallGap * ProfilePoint{-t.z, t.r};
    if (q.r < 0.0)
      throw DegenerateShape("inner wall crosses the axis (container radius " + format_fixed(p.r, 4) +
                            " cm at z = " + format_fixed(p.z, 4) + ")");
    if (q.z > rim) {
      if (!inner.empty()) {
        const auto& prev = inner.back();
        const double f = (rim - prev.z) / (q.z - prev.z);
        inner.push_back({prev.r + f * (q.r - prev.r), rim});
      }
      break;
    }
    inner.push_back(q);
    shape.wall_pairs.emplace_back(p, q);
  }
  if (inner.empty()) throw DegenerateShape("inner wall is empty");
  std::reverse(inner.begin(), inner.end());
  inner.push_back({0.0, inner.back().z});  // cavity floor meets the axis
  shape.inner = std::move(inner);

  if (self_intersects(shape.closed_profile())) throw DegenerateShape("profile polyline self-intersects");
  return shape;
}

DesignParams apply_rule(const DesignParams& params, Rule rule, double delta) {
  if (!(delta > 0.0)) throw RangeError("shape-regulating rules increase a dimension: delta must be > 0");
  DesignParams out = params;
  out[static_cast<std::size_t>(rule)] += delta;
  if (!out.positive()) throw RangeError("resulting dimensions must be strictly positive");
  return out;
}

double default_rule_delta(const DesignParams& params, Rule rule) {
  return 0.1 * params[static_cast<std::size_t>(rule)];
}

double TriangleMesh::volume() const {
  double v = 0.0;
  for (const auto& t : triangles) {
    const auto& a = vertices[t[0]];
    const auto& b = vertices[t[1]];
    const auto& c = vertices[t[2]];
    v += a.x * (b.y * c.z - b.z * c.y) - a.y * (b.x * c.z - b.z * c.x) + a.z * (b.x * c.y - b.y * c.x);
  }
  return v / 6.0;
}

namespace {
std::map<std::pair<std::size_t, std::size_t>, int> edge_uses(const TriangleMesh& m) {
  std::map<std::pair<std::size_t, std::size_t>, int> uses;
  for (const auto& t : m.triangles)
    for (int e = 0; e < 3; ++e) {
      auto a = t[e], b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++uses[{a, b}];
    }
  return uses;
}
}  // namespace

std::size_t TriangleMesh::edge_count() const { return edge_uses(*this).size(); }

long TriangleMesh::euler_characteristic() const {
  return static_cast<long>(vertices.size()) - static_cast<long>(edge_count()) + static_cast<long>(triangles.size());
}

bool TriangleMesh::is_closed() const {
  const auto uses = edge_uses(*this);
  return std::all_of(uses.begin(), uses.end(), [](const auto& kv) { return kv.second == 2; });
}

std::string TriangleMesh::to_stl(std::string_view name) const {
  std::string out = "solid " + std::string(name) + "\n";
  for (const auto& t : triangles) {
    const auto& a = vertices[t[0]];
    const auto& b = vertices[t[1]];
    const auto& c = vertices[t[2]];
    const Vec3 u{b.x - a.x, b.y - a.y, b.z - a.z}, v{c.x - a.x, c.y - a.y, c.z - a.z};
    Vec3 n{u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x};
    const double len = std::sqrt(n.x * n.x + n.y * n.y + n.z * n.z);
    if (len > 0.0) n = {n.x / len, n.y / len, n.z / len};
    auto fmt = [](const Vec3& p) { return format_fixed(p.x, 6) + " " + format_fixed(p.y, 6) + " " + format_fixed(p.z, 6); };
    out += "  facet normal " + fmt(n) + "\n    outer loop\n";
    for (const auto* p : {&a, &b, &c}) out += "      vertex " + fmt(*p) + "\n";
    out += "    endloop\n  endfacet\n";
  }
  out += "endsolid " + std::string(name) + "\n";
  return out;
}

TriangleMesh revolve_profile(std::span<const ProfilePoint> profile, int angular_segments) {
  if (angular_segments < 3) throw InvalidInput("angular_segments must be at least 3");
  if (profile.size() < 3) throw InvalidInput("profile needs at least 3 points");
  if (profile.front().r != 0.0 || profile.back().r != 0.0)
    throw InvalidInput("profile must start and end on the axis");
  for (std::size_t k = 1; k + 1 < profile.size(); ++k)
    if (!(profile[k].r > 0.0)) throw InvalidInput("interior profile points must lie off the axis");

  const auto segs = static_cast<std::size_t>(angular_segments);
  const std::size_t rings = profile.size() - 2;
  TriangleMesh mesh;
  mesh.vertices.reserve(rings * segs + 2);
  mesh.vertices.push_back({0.0, 0.0, profile.front().z});
  for (std::size_t k = 1; k + 1 < profile.size(); ++k)
    for (std::size_t s = 0; s < segs; ++s) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(s) / static_cast<double>(segs);
      mesh.vertices.push_back({profile[k].r * std::cos(theta), profile[k].r * std::sin(theta), profile[k].z});
    }
  const std::size_t top = mesh.vertices.size();
  mesh.vertices.push_back({0.0, 0.0, profile.back().z});

  auto ring = [&](std::size_t k, std::size_t s) { return 1 + k * segs + (s % segs); };
  for (std::size_t s = 0; s < segs; ++s) mesh.triangles.push_back({0, ring(0, s + 1), ring(0, s)});
  for (std::size_t k = 0; k + 1 < rings; ++k)
    for (std::size_t s = 0; s < segs; ++s) {
      const auto a = ring(k, s), b = ring(k, s + 1), c = ring(k + 1, s + 1), d = ring(k + 1, s);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }
  for (std::size_t s = 0; s < segs; ++s) mesh.triangles.push_back({top, ring(rings - 1, s), ring(rings - 1, s + 1)});

  if (mesh.volume() < 0.0)
    for (auto& t : mesh.triangles) std::swap(t[1], t[2]);
  return mesh;
}

TriangleMesh revolve(const GlassShape& shape, int angular_segments) {
  const auto chain = shape.closed_profile();
  return revolve_profile(chain, angular_segments);
}

std::string profile_svg(const GlassShape& shape) {
  double rmax = 0.0, zmin = shape.outer.front().z, zmax = zmin;
  for (const auto* curve : {&shape.outer, &shape.inner})
    for (const auto& p : *curve) {
      rmax = std::max(rmax, p.r);
      zmin = std::min(zmin, p.z);
      zmax = std::max(zmax, p.z);
    }
  const double width = 2.0 * rmax, height = zmax - zmin;
  auto path = [&](const std::vector<ProfilePoint>& pts, double side, const char* cls) {
    std::string d;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      d += (k == 0 ? "M" : " L");
      d += format_fixed(side * pts[k].r, 4) + "," + format_fixed(zmax - pts[k].z, 4);
    }
    return std::string("  <path class=\"") + cls + "\" d=\"" + d + "\"/>\n";
  };
  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + format_number(width) + "cm\" height=\"" +
         format_number(height) + "cm\" viewBox=\"" + format_number(-rmax) + " 0 " + format_number(width) + " " +
         format_number(height) + "\">\n";
  svg += "  <title>glass d1=" + format_number(shape.params.d1) + " d2=" + format_number(shape.params.d2) +
         " d3=" + format_number(shape.params.d3) + "</title>\n";
  svg += "  <g fill=\"none\" stroke=\"#1f3a5f\" stroke-width=\"0.03\" stroke-linejoin=\"round\">\n";
  svg += "  " + path(shape.outer, 1.0, "outer right");
  svg += "  " + path(shape.inner, 1.0, "inner right");
  svg += "  " + path(shape.outer, -1.0, "outer left");
  svg += "  " + path(shape.inner, -1.0, "inner left");
  svg += "  </g>\n</svg>\n";
  return svg;
}

}  // namespace formsense
