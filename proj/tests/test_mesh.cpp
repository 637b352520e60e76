#include <catch_amalgamated.hpp>

#include <cmath>
#include <initializer_list>
#include <sstream>

#include "lagwall/basis.hpp"
#include "lagwall/mesh.hpp"

using namespace lagwall;

namespace {

double quadrature_area(const Mesh<2>& m) {
  Lagrange1D basis{lobatto_points(m.geom_degree)};
  TensorRule<2> rule = tensor_rule<2>(gauss_rule(m.geom_degree + 2));
  double a = 0;
  std::span<const Vec<2>> coords(m.node);
  for (int e = 0; e < m.n_elems(); ++e)
    for (int q = 0; q < rule.size(); ++q)
      a += det(reference_jacobian(m, coords, e, rule.point[q], basis)) *
           rule.weight[q];
  return a;
}

Vec<2> mesh_centroid(const Mesh<2>& m) {
  Vec<2> c{};
  for (const auto& p : m.node) c += p;
  return (1.0 / m.n_nodes()) * c;
}

// Every boundary face midpoint normal must point away from the body for
// star-shaped domains.
void check_outward_normals(const Mesh<2>& m, const Vec<2>& center,
                           bool hole_faces_point_inward) {
  Lagrange1D basis{lobatto_points(m.geom_degree)};
  std::span<const Vec<2>> coords(m.node);
  for (const auto& bf : m.bdry) {
    auto fr = face_frame(m, coords, bf.elem, bf.face, Vec<1>{0.5}, basis);
    double outward = dot(fr.normal, normalized(fr.point - center));
    if (hole_faces_point_inward && bf.tag == 1)
      CHECK(outward < -0.5);
    else
      CHECK(outward > 0.5);
    CHECK(fr.measure > 0.0);
  }
}

}  // namespace

TEST_CASE("cartesian grids carry exact geometry") {
  auto m = make_cartesian(4, 3, {0.0, 0.0}, {2.0, 1.5}, 2);
  CHECK(m.n_elems() == 12);
  CHECK(m.n_nodes() == 9 * 7);
  CHECK(m.nodes_per_elem() == 9);
  CHECK(m.bdry.size() == size_t(2 * (4 + 3)));
  CHECK(quadrature_area(m) == Catch::Approx(3.0).margin(1e-13));
  CHECK(bounding_box_perimeter(m) == Catch::Approx(7.0).margin(1e-14));

  // Row-major node grid: connectivity rows strictly increasing.
  for (int e = 0; e < m.n_elems(); ++e) {
    auto en = m.elem_nodes(e);
    for (int a = 1; a < m.nodes_per_elem(); ++a) CHECK(en[a] > en[a - 1]);
  }
  // First cell's edge nodes sit on the Gauss-Lobatto layout of the cell.
  auto pts = lobatto_points(2);
  CHECK(m.node[1][0] == Catch::Approx(0.5 * pts[1]).margin(1e-16));

  for (const auto& bf : m.bdry) {
    CHECK(bf.tag == 0);
    CHECK(bf.wall);
  }
  check_outward_normals(m, {1.0, 0.75}, false);

  CHECK_THROWS_AS(make_cartesian(0, 3, {0, 0}, {1, 1}, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_cartesian(3, 3, {0, 0}, {1, 1}, 0),
                  std::invalid_argument);
}

TEST_CASE("axis-aligned face frames are exact") {
  auto m = make_cartesian(4, 4, {0.0, 0.0}, {1.0, 1.0}, 3);
  Lagrange1D basis{lobatto_points(3)};
  std::span<const Vec<2>> coords(m.node);
  for (const auto& bf : m.bdry) {
    auto fr = face_frame(m, coords, bf.elem, bf.face, Vec<1>{0.3}, basis);
    CHECK(fr.measure == Catch::Approx(0.25).margin(1e-14));
    CHECK(norm(fr.normal) == Catch::Approx(1.0).margin(1e-15));
    // Normal is one of the four axis directions, exactly.
    CHECK(std::abs(fr.normal[0]) + std::abs(fr.normal[1]) ==
          Catch::Approx(1.0).margin(1e-15));
  }
}

TEST_CASE("trapezoid with identity corners reproduces the cartesian grid") {
  auto cart = make_cartesian(5, 4, {0.0, 0.0}, {1.0, 1.0}, 2);
  std::array<Vec<2>, 4> id{Vec<2>{0, 0}, Vec<2>{1, 0}, Vec<2>{1, 1},
                           Vec<2>{0, 1}};
  auto trap = make_trapezoid(5, 4, id, 2);
  REQUIRE(trap.n_nodes() == cart.n_nodes());
  for (int i = 0; i < cart.n_nodes(); ++i) {
    CHECK(trap.node[i][0] == cart.node[i][0]);  // bitwise
    CHECK(trap.node[i][1] == cart.node[i][1]);
  }
  CHECK(trap.conn == cart.conn);
}

TEST_CASE("trapezoid area matches the bilinear image exactly") {
  // Bilinear quad area = half the diagonal cross product.
  std::array<Vec<2>, 4> c{Vec<2>{0, 0}, Vec<2>{1, 0}, Vec<2>{1, 0.92},
                          Vec<2>{0, 1}};
  auto m = make_trapezoid(3, 2, c, 2);
  CHECK(quadrature_area(m) == Catch::Approx(0.96).margin(1e-13));
  CHECK_THROWS_AS(  // inverted corner loop
      make_trapezoid(2, 2,
                     std::array<Vec<2>, 4>{Vec<2>{0, 0}, Vec<2>{0, 1},
                                           Vec<2>{1, 1}, Vec<2>{1, 0}},
                     2),
      std::invalid_argument);
}

TEST_CASE("disc mesh converges to the circle and bounds it exactly") {
  double prev = 0;
  int step = 0;
  for (int n : {1, 2, 4}) {
    auto m = make_disc(n, 4 * n, 1.0, 2);
    CHECK(m.n_elems() == 5 * n * n);
    double err = std::abs(quadrature_area(m) - M_PI);
    double tol[] = {5e-2, 5e-3, 5e-4};
    CHECK(err < tol[step]);
    if (step > 0) CHECK(err < prev / 8.0);  // measured ~16x per refinement
    prev = err;
    ++step;
  }

  auto m = make_disc(2, 8, 1.0, 3);
  // Boundary geometry nodes land exactly on the circle.
  std::vector<char> on_bdry(m.n_nodes(), 0);
  auto pts = lobatto_points(m.geom_degree);
  for (const auto& bf : m.bdry) {
    auto en = m.elem_nodes(bf.elem);
    for (int a = 0; a <= m.geom_degree; ++a) {
      Vec<2> xi = face_ref_point<2>(bf.face, Vec<1>{pts[a]});
      int i = int(std::lround(xi[0] * m.geom_degree));
      int j = int(std::lround(xi[1] * m.geom_degree));
      on_bdry[en[j * (m.geom_degree + 1) + i]] = 1;
    }
  }
  int count = 0;
  for (int i = 0; i < m.n_nodes(); ++i)
    if (on_bdry[i]) {
      CHECK(std::abs(norm(m.node[i]) - 1.0) < 1e-13);
      ++count;
    }
  CHECK(count == 8 * 3);  // n_azi cells, degree nodes each, shared endpoints
  check_outward_normals(m, {0.0, 0.0}, false);
  CHECK(bounding_box_perimeter(m) == Catch::Approx(8.0).margin(1e-13));

  CHECK_THROWS_AS(make_disc(2, 6, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(make_disc(2, 8, 1.0, 1), std::invalid_argument);
}

TEST_CASE("circular hole mesh: area convergence, tags, wall flags") {
  double exact = 1.0 - M_PI * 0.15 * 0.15;
  HoleParams hp;
  double prev = 0;
  int step = 0;
  for (int n : {4, 8}) {
    auto m = make_square_with_hole(hp, n, n / 2, 2);
    double err = std::abs(quadrature_area(m) - exact);
    CHECK(err < (step == 0 ? 1e-5 : 1e-6));
    if (step > 0) CHECK(err < prev / 8.0);
    prev = err;
    ++step;
  }

  auto m = make_square_with_hole(hp, 4, 2, 2);
  CHECK(m.bdry.size() == size_t(2 * 4 * 4));  // both loops, 4 sides each
  Lagrange1D basis{lobatto_points(2)};
  std::span<const Vec<2>> coords(m.node);
  int hole_faces = 0;
  for (const auto& bf : m.bdry) {
    CHECK(bf.wall);
    auto fr = face_frame(m, coords, bf.elem, bf.face, Vec<1>{0.5}, basis);
    double r = norm(fr.point - hp.center);
    if (bf.tag == 1) {
      ++hole_faces;
      // Face midpoint is a geometry node placed on the circle.
      CHECK(r == Catch::Approx(0.15).margin(1e-13));
    } else {
      double b = std::min({fr.point[0], 1 - fr.point[0], fr.point[1],
                           1 - fr.point[1]});
      CHECK(std::abs(b) < 1e-13);  // on the unit-square outline
    }
  }
  CHECK(hole_faces == 16);
  check_outward_normals(m, hp.center, true);

  HoleParams big;
  big.radius = 0.45;  // rim too close to the wall
  CHECK_THROWS_AS(make_square_with_hole(big, 4, 2, 2), std::invalid_argument);
}

TEST_CASE("rotated square hole keeps exact corners on aligned grids") {
  HoleParams hp;
  hp.shape = HoleShape::rotated_square;  // default 45-degree rotation
  for (int n : {4, 8}) {
    auto m = make_square_with_hole(hp, n, n / 2, 2);
    CHECK(std::abs(quadrature_area(m) - (1.0 - 4 * 0.15 * 0.15)) < 1e-12);
  }
  // Hole corners are mesh nodes: center + rotation of (+-a, +-a).
  auto m = make_square_with_hole(hp, 4, 2, 2);
  double a = 0.15 * M_SQRT2;
  for (Vec<2> corner : {Vec<2>{0.5, 0.5 - a}, Vec<2>{0.5 + a, 0.5},
                        Vec<2>{0.5, 0.5 + a}, Vec<2>{0.5 - a, 0.5}}) {
    double best = 1e30;
    for (const auto& p : m.node) best = std::fmin(best, norm(p - corner));
    CHECK(best < 1e-12);
  }
  check_outward_normals(m, hp.center, true);

  // Misaligned angles shave corners but must still produce valid cells.
  hp.angle = 0.3;
  CHECK_NOTHROW(make_square_with_hole(hp, 5, 2, 2));
}

TEST_CASE("mesh text serialization round-trips byte-identically") {
  HoleParams hp;
  auto m = make_square_with_hole(hp, 4, 2, 2);
  std::string text = write_mesh_text(m);
  std::istringstream is(text);
  auto m2 = read_mesh_text<2>(is);
  CHECK(write_mesh_text(m2) == text);
  CHECK(m2.geom_degree == m.geom_degree);
  CHECK(m2.conn == m.conn);
  CHECK(m2.bdry.size() == m.bdry.size());

  auto d = make_disc(2, 8, 1.0, 3);
  std::string dt = write_mesh_text(d);
  std::istringstream ds(dt);
  CHECK(write_mesh_text(read_mesh_text<2>(ds)) == dt);
}

TEST_CASE("mesh reader rejects malformed input") {
  auto fails = [](const std::string& text) {
    std::istringstream is(text);
    CHECK_THROWS_AS(read_mesh_text<2>(is), std::runtime_error);
  };
  fails("");                     // empty header
  fails("3 1 0 0 0\n");          // dimension mismatch
  fails("2 0 0 0 0\n");          // degree < 1
  fails("2 1 1 0 0\n0.0\n");     // truncated node row
  // Connectivity id out of range.
  fails("2 1 2 1 0\n0 0\n1 0\n0 1 2 3\n");
  // Boundary face index out of range.
  auto m = make_cartesian(1, 1, {0, 0}, {1, 1}, 1);
  std::string good = write_mesh_text(m);
  std::string bad = good;
  bad.replace(bad.rfind("0 3 0"), 5, "0 7 0");
  fails(bad);
}

TEST_CASE("element map inversion recovers reference points") {
  std::array<Vec<2>, 4> c{Vec<2>{0, 0}, Vec<2>{1.1, -0.1}, Vec<2>{1.3, 1.2},
                          Vec<2>{-0.2, 0.9}};
  auto m = make_trapezoid(3, 3, c, 2);
  Lagrange1D basis{lobatto_points(2)};
  std::span<const Vec<2>> coords(m.node);
  for (Vec<2> xi : {Vec<2>{0.2, 0.7}, Vec<2>{0.95, 0.05}, Vec<2>{0.5, 0.5}}) {
    Vec<2> phys = map_point(m, coords, 4, xi, basis);
    Vec<2> back;
    REQUIRE(invert_map(m, coords, 4, phys, basis, back));
    CHECK(norm(back - xi) < 1e-10);
  }
  Vec<2> out;
  CHECK_FALSE(invert_map(m, coords, 4, Vec<2>{50.0, 50.0}, basis, out));
}

TEST_CASE("mesh centroid stays put under node deduplication") {
  // Five-block disc assembly must not duplicate seam nodes.
  auto m = make_disc(2, 8, 1.0, 2);
  Vec<2> c = mesh_centroid(m);
  CHECK(norm(c) < 1e-13);
  // Count nodes on the inner square seam once: total node count for the
  // butterfly layout is the closed-form value for n=2, degree 2.
  std::map<std::pair<long, long>, int> seen;
  for (const auto& p : m.node) {
    auto key = std::make_pair(std::lround(p[0] * 1e9), std::lround(p[1] * 1e9));
    CHECK(++seen[key] == 1);
  }
}
