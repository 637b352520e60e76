#include <catch_amalgamated.hpp>

#include <cmath>
#include <initializer_list>
#include <random>
#include <vector>

#include "lagwall/mass.hpp"
#include "lagwall/mesh.hpp"
#include "lagwall/quaddata.hpp"
#include "lagwall/spaces.hpp"

using namespace lagwall;

namespace {

struct Setup {
  Mesh<2> mesh;
  Spaces<2> spaces;
  QuadData<2> qd;
};

Setup unit_square(int n, int k) {
  Setup s{make_cartesian(n, n, {0.0, 0.0}, {1.0, 1.0}, k), {}, {}};
  s.spaces = build_spaces(s.mesh, k);
  s.qd = init_quad_data(s.mesh, s.spaces);
  return s;
}

}  // namespace

TEST_CASE("penalty scale on a uniform grid") {
  // n x n unit square, affine cells: the volume Jacobian at every boundary
  // point is h*I, so alpha0 = beta * L / h = 4 beta n.
  int n = 4, k = 2;
  auto s = unit_square(n, k);
  CHECK(s.qd.beta == Catch::Approx(180.0));  // 20 (k+1)^2
  CHECK(s.qd.box_perimeter == Catch::Approx(4.0));
  CHECK(s.qd.rho_max == 1.0);
  REQUIRE(!s.qd.wall_pt.empty());
  for (const auto& wp : s.qd.wall_pt) {
    CHECK(wp.jbox == Catch::Approx(1.0 / (n * n)).epsilon(1e-12));
    CHECK(wp.alpha0 == Catch::Approx(4.0 * s.qd.beta * n).epsilon(1e-12));
    CHECK(wp.rho0 == 1.0);
    CHECK(norm(wp.n0) == Catch::Approx(1.0).margin(1e-14));
  }
}

TEST_CASE("wall penalty entries match hand quadrature") {
  // Bottom-left corner and adjacent edge node of a 4x4 Q2 grid. Restricted
  // to the bottom face (normal (0,-1)) the penalty couples only y with y,
  // with entries alpha0 * rho_max * L * h * integral of the 1D traces:
  //   corner basis   l0(t) = 2t^2 - 3t + 1, int l0^2 = 2/15
  //   midedge basis  l1(t) = 4t(1-t),       int l1^2 = 8/15, int l0 l1 = 1/15
  // The left face adds the same amounts to x-x at the corner, nothing to y.
  int n = 4, k = 2;
  auto s = unit_square(n, k);
  auto full = KinematicMass<2>::build(s.mesh, s.spaces, s.qd, true);
  auto vol = KinematicMass<2>::build(s.mesh, s.spaces, s.qd, false);

  double h = 1.0 / n;
  double scale = (4.0 * s.qd.beta * n) * 1.0 * 4.0 * h;  // alpha0 rho L h
  int corner = 0;                          // node (0,0)
  int mid = 1;                             // node (h/2, 0)
  auto pen = [&](int a, int i, int b, int j) {
    return full.matrix().entry(a * 2 + i, b * 2 + j) -
           vol.matrix().entry(a * 2 + i, b * 2 + j);
  };
  CHECK(pen(corner, 1, corner, 1) ==
        Catch::Approx(scale * 2.0 / 15.0).epsilon(1e-11));
  CHECK(pen(mid, 1, mid, 1) ==
        Catch::Approx(scale * 8.0 / 15.0).epsilon(1e-11));
  CHECK(pen(corner, 1, mid, 1) ==
        Catch::Approx(scale * 1.0 / 15.0).epsilon(1e-11));
  // Corner x-x comes from the left face with the same trace integrals.
  CHECK(pen(corner, 0, corner, 0) ==
        Catch::Approx(scale * 2.0 / 15.0).epsilon(1e-11));
  // The two faces never mix components at an axis-aligned corner.
  CHECK(pen(corner, 0, corner, 1) == 0.0);
  // Interior nodes carry no penalty at all.
  int row = n * k + 1;           // nodes per grid row
  int interior = row * 2 + 2;    // node at (h, h)
  CHECK(pen(interior, 0, interior, 0) == 0.0);
  CHECK(pen(interior, 1, interior, 1) == 0.0);
}

TEST_CASE("volume block is symmetric, component-diagonal, and sums to mass") {
  std::array<Vec<2>, 4> c{
      Vec<2>{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.92}, {0.0, 1.0}};
  auto mesh = make_trapezoid(3, 3, c, 2);
  auto spaces = build_spaces(mesh, 2);
  auto qd = init_quad_data(mesh, spaces);
  auto vol = KinematicMass<2>::build(mesh, spaces, qd, false);
  const Csr& M = vol.matrix();

  // Component blocks are identical and decoupled.
  int nn = mesh.n_nodes();
  for (int a = 0; a < nn; a += 7)
    for (int b = 0; b < nn; b += 5) {
      CHECK(M.entry(a * 2, b * 2 + 1) == 0.0);
      CHECK(M.entry(a * 2, b * 2) == M.entry(a * 2 + 1, b * 2 + 1));
      CHECK(M.entry(a * 2, b * 2) ==
            Catch::Approx(M.entry(b * 2, a * 2)).margin(1e-15));
    }

  // Row sums against the all-ones x-velocity give the total mass: the
  // basis sums to one, so 1^T M 1 = integral of rho0 = area (rho0 = 1).
  std::vector<double> ones(size_t(nn) * 2, 0.0), y(size_t(nn) * 2);
  for (int a = 0; a < nn; ++a) ones[a * 2] = 1.0;
  vol.apply(ones, y);
  double mass = 0;
  for (int a = 0; a < nn; ++a) mass += y[a * 2];
  CHECK(mass == Catch::Approx(0.96).epsilon(1e-12));
}

TEST_CASE("kinematic solve inverts apply") {
  auto s = unit_square(3, 2);
  auto mm = KinematicMass<2>::build(s.mesh, s.spaces, s.qd);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(mm.size()), rhs(mm.size()), x;
  for (auto& a : v) a = u(rng);
  mm.apply(v, rhs);
  auto rep = mm.solve(rhs, x, 1e-13);
  CHECK(rep.converged);
  CHECK(rep.rel_residual <= 4e-13);
  double err = 0, ref = 0;
  for (int i = 0; i < mm.size(); ++i) {
    err = std::fmax(err, std::abs(x[i] - v[i]));
    ref = std::fmax(ref, std::abs(v[i]));
  }
  CHECK(err <= 1e-9 * ref);

  // Warm start from the exact solution converges immediately.
  auto rep2 = mm.solve(rhs, x, 1e-13);
  CHECK(rep2.converged);
  CHECK(rep2.iterations == 0);
}

TEST_CASE("constraint mask freezes dofs without touching the rest") {
  auto s = unit_square(3, 2);
  auto mm = KinematicMass<2>::build(s.mesh, s.spaces, s.qd);
  std::vector<unsigned char> mask(mm.size(), 0);
  mask[5] = mask[11] = 1;
  mm.set_constraints(mask);

  std::vector<double> e5(mm.size(), 0.0), y(mm.size());
  e5[5] = 3.0;
  std::vector<double> scratch;
  mm.apply_constrained(e5, y, scratch);
  for (int i = 0; i < mm.size(); ++i) CHECK(y[i] == (i == 5 ? 3.0 : 0.0));

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> rhs(mm.size()), x;
  for (auto& a : rhs) a = u(rng);
  auto rep = mm.solve(rhs, x, 1e-12);
  CHECK(rep.converged);
  CHECK(x[5] == 0.0);
  CHECK(x[11] == 0.0);

  CHECK_THROWS(mm.set_constraints(std::vector<unsigned char>(3, 0)));
}

TEST_CASE("reassembly is bit-identical") {
  auto s = unit_square(3, 2);
  auto a = KinematicMass<2>::build(s.mesh, s.spaces, s.qd);
  auto b = KinematicMass<2>::build(s.mesh, s.spaces, s.qd);
  REQUIRE(a.matrix().val.size() == b.matrix().val.size());
  for (size_t i = 0; i < a.matrix().val.size(); ++i)
    CHECK(a.matrix().val[i] == b.matrix().val[i]);
  auto ta = ThermoMass<2>::build(s.mesh, s.spaces, s.qd);
  auto tb = ThermoMass<2>::build(s.mesh, s.spaces, s.qd);
  for (int e = 0; e < ta.n_elems(); ++e)
    for (int l = 0; l < ta.block_size(); ++l)
      for (int m = 0; m < ta.block_size(); ++m)
        CHECK(ta.entry(e, l, m) == tb.entry(e, l, m));
}

TEST_CASE("thermo blocks: symmetry, row sums, and solve round-trip") {
  std::array<Vec<2>, 4> c{
      Vec<2>{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.92}, {0.0, 1.0}};
  auto mesh = make_trapezoid(3, 2, c, 2);
  auto spaces = build_spaces(mesh, 2);
  auto qd = init_quad_data(mesh, spaces);
  auto tm = ThermoMass<2>::build(mesh, spaces, qd);
  CHECK(tm.block_size() == 4);  // (k)^2 energy dofs per element
  CHECK(tm.n_elems() == mesh.n_elems());
  CHECK(tm.size() == spaces.n_thermo(mesh));

  double mass = 0;
  for (int e = 0; e < tm.n_elems(); ++e)
    for (int l = 0; l < tm.block_size(); ++l) {
      mass += tm.row_sum(e, l);
      for (int m = 0; m < tm.block_size(); ++m)
        CHECK(tm.entry(e, l, m) ==
              Catch::Approx(tm.entry(e, m, l)).margin(1e-15));
    }
  CHECK(mass == Catch::Approx(0.96).epsilon(1e-12));

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::vector<double> e(tm.size()), rhs(tm.size()), back(tm.size());
  for (auto& a : e) a = u(rng);
  tm.apply(e, rhs);
  tm.solve(rhs, back);
  for (int i = 0; i < tm.size(); ++i)
    CHECK(back[i] == Catch::Approx(e[i]).epsilon(1e-12));
}
