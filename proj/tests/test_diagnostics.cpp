#include <catch_amalgamated.hpp>

#include <cmath>
#include <initializer_list>
#include <vector>

#include "lagwall/diagnostics.hpp"
#include "lagwall/mass.hpp"
#include "lagwall/mesh.hpp"
#include "lagwall/quaddata.hpp"
#include "lagwall/spaces.hpp"

using namespace lagwall;

namespace {

HydroState<2> rest_state(const Mesh<2>& mesh, const Spaces<2>& spaces) {
  HydroState<2> s;
  s.x.resize(size_t(mesh.n_nodes()) * 2);
  for (int i = 0; i < mesh.n_nodes(); ++i)
    for (int d = 0; d < 2; ++d) s.x[i * 2 + d] = mesh.node[i][d];
  s.v.assign(s.x.size(), 0.0);
  s.e.assign(spaces.n_thermo(mesh), 0.0);
  return s;
}

}  // namespace

TEST_CASE("conservation report on closed-form states") {
  int n = 2;
  auto mesh = make_cartesian(n, n, {0.0, 0.0}, {1.0, 1.0}, 2);
  auto spaces = build_spaces(mesh, 2);
  auto qd = init_quad_data(mesh, spaces);
  auto mv = KinematicMass<2>::build(mesh, spaces, qd);
  auto me = ThermoMass<2>::build(mesh, spaces, qd);

  auto s = rest_state(mesh, spaces);
  Vec<2> c{0.4, -0.3};
  for (int i = 0; i < mesh.n_nodes(); ++i)
    for (int d = 0; d < 2; ++d) s.v[i * 2 + d] = c[d];
  std::fill(s.e.begin(), s.e.end(), 1.7);

  auto r = conservation_report(mesh, spaces, qd, mv, me, s);
  double c2 = c[0] * c[0] + c[1] * c[1];
  CHECK(r.mass == Catch::Approx(1.0).epsilon(1e-13));
  CHECK(r.internal == Catch::Approx(1.7).epsilon(1e-13));
  CHECK(r.momentum[0] == Catch::Approx(c[0]).epsilon(1e-13));
  CHECK(r.momentum[1] == Catch::Approx(c[1]).epsilon(1e-13));

  // Uniform drift against the initial-boundary penalty block: each side
  // carries alpha0 rho L (c.n)^2 over unit length, alpha0 = 4 beta n.
  double pen = 0.5 * (4.0 * qd.beta * n) * 1.0 * 4.0 * 2.0 * c2;
  CHECK(r.kinetic_penalty == Catch::Approx(pen).epsilon(1e-12));
  CHECK(r.kinetic == Catch::Approx(0.5 * c2 + pen).epsilon(1e-12));
  CHECK(r.total == Catch::Approx(r.kinetic + r.internal).margin(1e-14));
}

TEST_CASE("boundary violation norm on prescribed fields") {
  auto mesh = make_cartesian(3, 3, {0.0, 0.0}, {1.0, 1.0}, 2);
  auto spaces = build_spaces(mesh, 2);
  auto qd = init_quad_data(mesh, spaces);
  auto s = rest_state(mesh, spaces);

  SECTION("rest is silent") {
    CHECK(boundary_violation(mesh, spaces, qd, s) == 0.0);
  }

  SECTION("uniform drift integrates (v.n)^2 exactly") {
    Vec<2> c{0.4, -0.3};
    for (int i = 0; i < mesh.n_nodes(); ++i)
      for (int d = 0; d < 2; ++d) s.v[i * 2 + d] = c[d];
    double expect = std::sqrt(2.0 * (c[0] * c[0] + c[1] * c[1]));
    CHECK(boundary_violation(mesh, spaces, qd, s) ==
          Catch::Approx(expect).epsilon(1e-13));
  }

  SECTION("wall-tangential fields vanish") {
    for (int i = 0; i < mesh.n_nodes(); ++i) {
      s.v[i * 2 + 0] = std::sin(M_PI * mesh.node[i][0]);
      s.v[i * 2 + 1] = std::sin(M_PI * mesh.node[i][1]);
    }
    CHECK(boundary_violation(mesh, spaces, qd, s) <= 1e-13);
  }
}

TEST_CASE("boundary violation separates tags on the holed square") {
  HoleParams hp;  // circle r = 0.15 centered at (0.5, 0.5)
  auto mesh = make_square_with_hole(hp, 6, 3, 2);
  auto spaces = build_spaces(mesh, 2);
  auto qd = init_quad_data(mesh, spaces);
  auto s = rest_state(mesh, spaces);
  // Radial outflow from the hole center: |v.n| = 1 on the hole rim; on the
  // outer square the normal component varies with position.
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    double dx = mesh.node[i][0] - 0.5, dy = mesh.node[i][1] - 0.5;
    double r = std::hypot(dx, dy);
    s.v[i * 2 + 0] = dx / r;
    s.v[i * 2 + 1] = dy / r;
  }
  double hole = boundary_violation(mesh, spaces, qd, s, 1);
  double outer = boundary_violation(mesh, spaces, qd, s, 0);
  double all = boundary_violation(mesh, spaces, qd, s, -1);
  CHECK(hole == Catch::Approx(std::sqrt(2.0 * M_PI * 0.15)).margin(2e-4));
  CHECK(all * all == Catch::Approx(hole * hole + outer * outer)
                         .epsilon(1e-12));
  CHECK(outer > hole);  // larger perimeter, O(1) normal component
}

TEST_CASE("wall momentum integrals on closed-form states") {
  auto mesh = make_cartesian(3, 3, {0.0, 0.0}, {1.0, 1.0}, 2);
  auto spaces = build_spaces(mesh, 2);
  auto qd = init_quad_data(mesh, spaces);
  ForceSettings<2> fs;

  SECTION("constant pressure closes around the box") {
    auto s = rest_state(mesh, spaces);
    std::fill(s.e.begin(), s.e.end(), 2.5);
    auto wi = wall_momentum_integrals(mesh, spaces, qd, fs, s.x, s.v, s.e);
    CHECK(std::abs(wi.traction[0]) <= 1e-13);
    CHECK(std::abs(wi.traction[1]) <= 1e-13);
    CHECK(wi.penalty[0] == 0.0);
    CHECK(wi.penalty[1] == 0.0);
  }

  SECTION("uniform drift meets the acoustic penalty") {
    auto s = rest_state(mesh, spaces);
    std::fill(s.e.begin(), s.e.end(), 2.5);
    Vec<2> c{0.25, -0.15};
    for (int i = 0; i < mesh.n_nodes(); ++i)
      for (int d = 0; d < 2; ++d) s.v[i * 2 + d] = c[d];
    auto wi = wall_momentum_integrals(mesh, spaces, qd, fs, s.x, s.v, s.e);
    // integral of beta rho cs (c.n) n over the four unit sides.
    double cs = fs.gas.sound_speed(2.5);
    for (int d = 0; d < 2; ++d)
      CHECK(wi.penalty[d] ==
            Catch::Approx(qd.beta * 1.0 * cs * 2.0 * c[d]).epsilon(1e-12));
  }
}

TEST_CASE("shock locator finds a synthetic density ring") {
  auto mesh = make_cartesian(8, 8, {0.0, 0.0}, {1.0, 1.0}, 2);
  auto spaces = build_spaces(mesh, 2);
  std::function<double(const Vec<2>&)> ring = [](const Vec<2>& p) {
    double r = std::hypot(p[0], p[1]);
    return 1.0 + 3.0 * std::exp(-200.0 * (r - 0.35) * (r - 0.35));
  };

  RayFan fan;  // first quadrant, origin at (0,0)
  auto s = rest_state(mesh, spaces);

  SECTION("on the undeformed mesh") {
    auto sf = shock_front_radius(mesh, spaces, s, fan, ring);
    REQUIRE(sf.found);
    CHECK(sf.valid_rays == fan.n_rays);
    CHECK(sf.radius == Catch::Approx(0.35).margin(3e-3));
  }

  SECTION("through a uniform dilation of the mesh") {
    // Doubling every coordinate moves the ring to current radius 0.7 and
    // quarters the density; the locator works in current coordinates.
    for (auto& xi : s.x) xi *= 2.0;
    RayFan wide = fan;
    wide.r_max = [](double) { return 1.4; };
    auto sf = shock_front_radius(mesh, spaces, s, wide, ring);
    REQUIRE(sf.found);
    CHECK(sf.radius == Catch::Approx(0.7).margin(6e-3));
  }

  SECTION("uniform density reports nothing") {
    auto sf = shock_front_radius(mesh, spaces, s, fan);
    CHECK(!sf.found);
    CHECK(sf.valid_rays == 0);
  }

  SECTION("monotone profiles without an interior peak are rejected") {
    std::function<double(const Vec<2>&)> slope =
        [](const Vec<2>& p) { return 1.0 + p[0]; };
    auto sf = shock_front_radius(mesh, spaces, s, fan, slope);
    CHECK(!sf.found);
  }
}
