#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "formsense/types.hpp"

namespace formsense {

struct ProfilePoint {
  double r = 0.0;  // radius, cm
  double z = 0.0;  // height, cm
  friend bool operator==(const ProfilePoint&, const ProfilePoint&) = default;
};

inline constexpr std::size_t kTemplateNodes = 15;
/// Wall thickness between outer and inner container curves, cm.
inline constexpr double kWallGap = 0.1;

/// Reference outer curve of the glass. Nodes [0, foot_start] form the base,
/// [foot_start, container_start] the foot and [container_start, 14] the
/// container; the junction nodes (P5 and P9 by default) carry shared clamped
/// tangents so the assembled curve is C1 there.
struct ProfileTemplate {
  std::string name;
  std::array<ProfilePoint, kTemplateNodes> nodes{};
  std::size_t foot_start = 4;
  std::size_t container_start = 8;
  ProfilePoint start_tangent{1.0, 0.0};
  ProfilePoint foot_tangent{0.0, 1.0};
  ProfilePoint container_tangent{1.0, 0.0};

  /// Throws InvalidInput when the invariants above do not hold.
  void validate() const;
  double base_height() const { return nodes[foot_start].z; }
};

ProfileTemplate canonical_template();
ProfileTemplate load_template(std::string_view json_text);
std::string serialize_template(const ProfileTemplate& t);

/// Sampled outer/inner curves of one glass.
struct GlassShape {
  DesignParams params;
  std::vector<ProfilePoint> outer;  // from the axis at z = 0 up to the rim
  std::vector<ProfilePoint> inner;  // from the rim down to the axis (cavity floor)
  std::size_t foot_offset = 0;       // index of P5 in `outer`
  std::size_t container_offset = 0;  // index of P9 in `outer`
  /// Unit tangents on either side of P5 and P9, taken from the spline sections.
  std::array<ProfilePoint, 2> p5_tangents{};
  std::array<ProfilePoint, 2> p9_tangents{};
  /// Outer container point and matching inner offset point, for every container sample kept.
  std::vector<std::pair<ProfilePoint, ProfilePoint>> wall_pairs;

  std::span<const ProfilePoint> container() const {
    return std::span<const ProfilePoint>(outer).subspan(container_offset);
  }
  double container_height() const;
  double max_container_diameter() const;
  double max_diameter() const;
  double height() const;
  /// Outer curve followed by the inner curve: an open chain from axis to axis.
  std::vector<ProfilePoint> closed_profile() const;
};

GlassShape generate_profile(const ProfileTemplate& tmpl, const DesignParams& params,
                            int samples_per_segment = 24);

DesignParams apply_rule(const DesignParams& params, Rule rule, double delta);
/// Preview step used when no delta is given: 10% of the current dimension.
double default_rule_delta(const DesignParams& params, Rule rule);

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::size_t, 3>> triangles;

  double volume() const;
  std::size_t edge_count() const;
  long euler_characteristic() const;
  bool is_closed() const;  // every edge shared by exactly two triangles
  std::string to_stl(std::string_view name = "glass") const;
};

/// Revolves an open profile chain whose first and last points lie on the axis.
TriangleMesh revolve_profile(std::span<const ProfilePoint> profile, int angular_segments);
TriangleMesh revolve(const GlassShape& shape, int angular_segments);

std::string profile_svg(const GlassShape& shape);

}  // namespace formsense
