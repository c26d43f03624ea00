#include <doctest.h>

#include <cmath>
#include <numbers>
#include <regex>

#include "formsense/error.hpp"
#include "formsense/geometry.hpp"
#include "formsense/io.hpp"
#include "formsense/random.hpp"

using namespace formsense;

namespace {

double distance_to_segment(ProfilePoint p, ProfilePoint a, ProfilePoint b) {
  const double vx = b.r - a.r, vz = b.z - a.z;
  const double len2 = vx * vx + vz * vz;
  double t = len2 > 0.0 ? ((p.r - a.r) * vx + (p.z - a.z) * vz) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.r - (a.r + t * vx), p.z - (a.z + t * vz));
}

double distance_to_polyline(ProfilePoint p, const std::vector<ProfilePoint>& line) {
  double best = INFINITY;
  for (std::size_t k = 0; k + 1 < line.size(); ++k) best = std::min(best, distance_to_segment(p, line[k], line[k + 1]));
  return best;
}

}  // namespace

TEST_CASE("bundled template matches the canonical one") {
  const auto t = load_template(read_file(fixture_dir() / "template.json"));
  CHECK(serialize_template(t) == serialize_template(canonical_template()));
  CHECK(load_template(serialize_template(t)).nodes == t.nodes);
  CHECK_NOTHROW(t.validate());
}

TEST_CASE("profile extents follow the design parameters") {
  const auto shape = generate_profile(canonical_template(), {8, 5, 8});
  CHECK(shape.container_height() == doctest::Approx(8).epsilon(1e-9));
  CHECK(shape.max_container_diameter() == doctest::Approx(8).epsilon(1e-9));
  CHECK(shape.outer[shape.container_offset].z == doctest::Approx(canonical_template().base_height() + 5));
  CHECK(shape.outer.front() == ProfilePoint{0, 0});
  for (const auto& p : shape.inner) CHECK(p.r >= 0.0);
}

TEST_CASE("thin containers are degenerate") {
  CHECK_THROWS_AS(generate_profile(canonical_template(), {8, 5, 0.15}), DegenerateShape);
  CHECK_THROWS_AS(generate_profile(canonical_template(), {8, 0, 8}), RangeError);
}

TEST_CASE("wall gap measured against the inner polyline") {
  const auto shape = generate_profile(canonical_template(), {8, 5, 8});
  const auto& pairs = shape.wall_pairs;
  REQUIRE(pairs.size() >= 50);
  for (int k = 0; k < 50; ++k) {
    const auto idx = static_cast<std::size_t>(k) * (pairs.size() - 1) / 49;
    CHECK(std::abs(distance_to_polyline(pairs[idx].first, shape.inner) - kWallGap) <= 1e-3);
  }
}

TEST_CASE("junctions are tangent-continuous") {
  for (const DesignParams d : {DesignParams{8, 5, 8}, DesignParams{8, 3, 6}, DesignParams{10, 7, 9.5}}) {
    const auto s = generate_profile(canonical_template(), d);
    const auto dot5 = s.p5_tangents[0].r * s.p5_tangents[1].r + s.p5_tangents[0].z * s.p5_tangents[1].z;
    const auto dot9 = s.p9_tangents[0].r * s.p9_tangents[1].r + s.p9_tangents[0].z * s.p9_tangents[1].z;
    CHECK(dot5 == doctest::Approx(1).epsilon(1e-12));
    CHECK(dot9 == doctest::Approx(1).epsilon(1e-12));
  }
}

TEST_CASE("diameter scales linearly with d3") {
  const auto base = generate_profile(canonical_template(), {8, 5, 7}).max_container_diameter();
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    const double lambda = rng.uniform(0.5, 2.0);
    CHECK(generate_profile(canonical_template(), {8, 5, 7 * lambda}).max_container_diameter() ==
          doctest::Approx(lambda * base).epsilon(1e-9));
  }
}

TEST_CASE("apply_rule") {
  CHECK(apply_rule({8, 5, 7}, Rule::R2, 0.5) == DesignParams{8, 5.5, 7});
  CHECK(apply_rule({8, 5, 7}, Rule::R1, 1.0) == DesignParams{9, 5, 7});
  CHECK(apply_rule({8, 5, 7}, Rule::R3, 0.5) == DesignParams{8, 5, 7.5});
  CHECK_THROWS_AS(apply_rule({8, 5, 7}, Rule::R3, 0.0), RangeError);
  CHECK_THROWS_AS(apply_rule({8, 5, 7}, Rule::R3, -1.0), RangeError);
  const DesignParams p{8, 5, 7};
  CHECK(apply_rule(apply_rule(apply_rule(p, Rule::R1, 1), Rule::R2, 2), Rule::R3, 0.5) ==
        apply_rule(apply_rule(apply_rule(p, Rule::R3, 0.5), Rule::R1, 1), Rule::R2, 2));
  CHECK(default_rule_delta(p, Rule::R2) == doctest::Approx(0.5));
}

TEST_CASE("revolved glass is a closed sphere-like surface") {
  const auto shape = generate_profile(canonical_template(), {8, 5, 8});
  const auto mesh = revolve(shape, 64);
  CHECK(mesh.is_closed());
  CHECK(mesh.euler_characteristic() == 2);
  CHECK(mesh.vertices.size() == (shape.closed_profile().size() - 2) * 64 + 2);
  CHECK(mesh.volume() > 0.0);
  double zlo = INFINITY, zhi = -INFINITY;
  for (const auto& v : mesh.vertices) {
    zlo = std::min(zlo, v.z);
    zhi = std::max(zhi, v.z);
  }
  CHECK(zhi - zlo == shape.height());
  const auto stl = mesh.to_stl();
  CHECK(stl.rfind("solid glass", 0) == 0);
  CHECK(stl.find("endsolid glass") != std::string::npos);
}

TEST_CASE("cylinder volume against the analytic value") {
  const std::vector<ProfilePoint> cylinder{{0, 0}, {1, 0}, {1, 2}, {0, 2}};
  const auto mesh = revolve_profile(cylinder, 256);
  const double exact = std::numbers::pi * 1.0 * 1.0 * 2.0;
  CHECK(std::abs(mesh.volume() - exact) <= 0.01);
  CHECK(std::abs(mesh.volume() - exact) / exact <= 0.002);
  CHECK(mesh.euler_characteristic() == 2);
  CHECK_THROWS_AS(revolve_profile(cylinder, 2), InvalidInput);
}

TEST_CASE("profile SVG") {
  const auto shape = generate_profile(canonical_template(), {8, 5, 8});
  const auto svg = profile_svg(shape);
  CHECK(svg == profile_svg(generate_profile(canonical_template(), {8, 5, 8})));
  const std::regex path_re("<path class=\"(outer|inner) (left|right)\"");
  int paths = 0, right = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), path_re); it != std::sregex_iterator(); ++it) {
    ++paths;
    right += (*it)[2] == "right";
  }
  CHECK(paths == 4);
  CHECK(right == 2);

  std::smatch m;
  REQUIRE(std::regex_search(svg, m, std::regex("viewBox=\"([-0-9.e]+) ([-0-9.e]+) ([-0-9.e]+) ([-0-9.e]+)\"")));
  const double w = std::stod(m[3]), h = std::stod(m[4]);
  double base_r = 0.0;
  for (std::size_t k = 0; k <= shape.foot_offset; ++k) base_r = std::max(base_r, shape.outer[k].r);
  const double expected = (8.0 + 5.0 + canonical_template().base_height()) / std::max(8.0, 2.0 * base_r);
  CHECK(h / w == doctest::Approx(expected).epsilon(1e-6));
}
