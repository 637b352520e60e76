#include <catch_amalgamated.hpp>

#include <cmath>
#include <initializer_list>

#include "lagwall/physics.hpp"

using namespace lagwall;

TEST_CASE("ideal gas closure") {
  IdealGas gas;  // gamma 1.4
  CHECK(gas.pressure(1.0, 2.5) == Catch::Approx(1.0).margin(1e-15));
  CHECK(gas.pressure(3.0, 0.0) == 0.0);
  // Transient energy undershoots clamp to vacuum instead of tension.
  CHECK(gas.pressure(1.0, -0.3) == 0.0);
  CHECK(gas.sound_speed(-1.0) == 0.0);

  IdealGas mono{5.0 / 3.0};
  CHECK(mono.sound_speed(1.0) ==
        Catch::Approx(std::sqrt(10.0 / 9.0)).margin(1e-15));
  // c_s^2 = gamma (gamma-1) e = gamma p / rho.
  double rho = 2.7, e = 0.9;
  CHECK(mono.sound_speed(e) * mono.sound_speed(e) ==
        Catch::Approx(mono.gamma * mono.pressure(rho, e) / rho).margin(1e-14));
}

TEST_CASE("compression switch isolates compressive motion") {
  Mat<2> rot;  // pure rotation rate: no compression
  rot(0, 1) = -1.0;
  rot(1, 0) = 1.0;
  CHECK(compression_switch(rot) == 0.0);

  Mat<2> comp;  // isotropic compression: fully compressive
  comp(0, 0) = comp(1, 1) = -2.0;
  CHECK(compression_switch(comp) == Catch::Approx(1.0).margin(1e-15));

  Mat<2> shear;  // trace-free shear
  shear(0, 1) = shear(1, 0) = 0.5;
  CHECK(compression_switch(shear) == 0.0);

  Mat<2> zero;
  CHECK(compression_switch(zero) == 0.0);
}

TEST_CASE("viscosity vanishes for rigid motion") {
  ViscositySettings vs;
  Mat<2> zero;
  auto r0 = artificial_viscosity(vs, 1.0, 1.0, zero, 0.1);
  CHECK(r0.mu == 0.0);
  CHECK(frobenius_norm(r0.stress) == 0.0);

  Mat<2> spin;  // rigid rotation: antisymmetric gradient
  spin(0, 1) = -3.0;
  spin(1, 0) = 3.0;
  auto r1 = artificial_viscosity(vs, 1.0, 1.0, spin, 0.1);
  CHECK(r1.mu == 0.0);
  CHECK(frobenius_norm(r1.stress) == 0.0);
}

TEST_CASE("linear viscosity term gates on compression only") {
  ViscositySettings vs;
  double rho = 1.0, cs = 1.0, l0 = 0.1, rate = 2.0;
  Mat<2> expand, compress;
  expand(0, 0) = expand(1, 1) = rate;
  compress(0, 0) = compress(1, 1) = -rate;
  auto re = artificial_viscosity(vs, rho, cs, expand, l0);
  auto rc = artificial_viscosity(vs, rho, cs, compress, l0);
  // The quadratic term follows |strain| either way; the linear term only
  // fires in compression.
  double quad = rho * vs.q2 * l0 * l0 * rate;
  CHECK(re.mu == Catch::Approx(quad).margin(1e-14));
  CHECK(rc.mu == Catch::Approx(quad + rho * vs.q1 * l0 * cs).margin(1e-14));
}

TEST_CASE("uniaxial compression reproduces the closed form") {
  ViscositySettings vs;  // q1 = 0.5, q2 = 2
  double rho = 2.0, cs = 1.5, l0 = 0.25, rate = 4.0;
  Mat<2> g;
  g(0, 0) = -rate;  // compress along x only
  auto r = artificial_viscosity(vs, rho, cs, g, l0);
  CHECK(r.length == Catch::Approx(l0).margin(1e-15));
  // psi0 = |div|/||grad|| = 1, psi1 = 1.
  double mu = rho * (vs.q2 * l0 * l0 * rate + vs.q1 * l0 * cs);
  CHECK(r.mu == Catch::Approx(mu).margin(1e-13));
  CHECK(r.stress(0, 0) == Catch::Approx(-mu * rate).margin(1e-12));
  CHECK(r.stress(1, 1) == 0.0);
}

TEST_CASE("length scale stays pinned to the initial cell size") {
  // The scale must not track the current deformation: a cell crushing in
  // one direction would otherwise weaken its own damping quadratically
  // and collapse. Shear orientation and strain magnitude leave it fixed.
  ViscositySettings vs;
  vs.q1 = 0.0;  // isolate the quadratic term
  double l0 = 0.1, rate = 1.0;
  Mat<2> g;
  g(0, 0) = -rate;
  auto r = artificial_viscosity(vs, 1.0, 1.0, g, l0);
  CHECK(r.length == Catch::Approx(l0).margin(1e-16));
  CHECK(r.mu == Catch::Approx(vs.q2 * l0 * l0 * rate).margin(1e-13));

  Mat<2> gs;  // strong shear plus weak compression, rotated axes
  gs(0, 0) = -0.3;
  gs(0, 1) = 4.0;
  gs(1, 0) = 4.0;
  gs(1, 1) = -0.1;
  auto rs = artificial_viscosity(vs, 1.0, 1.0, gs, l0);
  CHECK(rs.length == Catch::Approx(l0).margin(1e-16));
}

TEST_CASE("disabled viscosity contributes nothing") {
  ViscositySettings off;
  off.enabled = false;
  Mat<2> g;
  g(0, 0) = -5.0;
  auto r = artificial_viscosity(off, 1.0, 1.0, g, 0.1);
  CHECK(r.mu == 0.0);
  CHECK(frobenius_norm(r.stress) == 0.0);
}
