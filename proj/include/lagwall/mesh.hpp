#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "lagwall/algebra.hpp"
#include "lagwall/basis.hpp"

namespace lagwall {

// Unstructured body-fitted meshes of tensor-product cells. Node coordinates
// stored on the mesh are the initial configuration; the moving configuration
// lives in the state vector and is passed alongside where needed.
//
// Local node ordering inside a cell is lexicographic over the unit cell
// [0,1]^D, first reference coordinate fastest. Geometry nodes use the
// Gauss-Lobatto layout of the matching kinematic basis, so meshes are
// isoparametric with the kinematic space by construction.

template <int D>
struct Mesh {
  int geom_degree = 1;
  std::vector<Vec<D>> node;  // initial coordinates
  std::vector<int> conn;     // n_elems * nodes_per_elem node ids

  struct BdryFace {
    int elem = 0;
    int face = 0;
    int tag = 0;
    bool wall = true;
  };
  std::vector<BdryFace> bdry;

  int nodes_per_side() const { return geom_degree + 1; }
  int nodes_per_elem() const {
    int n = 1;
    for (int d = 0; d < D; ++d) n *= nodes_per_side();
    return n;
  }
  int n_nodes() const { return static_cast<int>(node.size()); }
  int n_elems() const {
    return static_cast<int>(conn.size()) / nodes_per_elem();
  }
  std::span<const int> elem_nodes(int e) const {
    return {conn.data() + static_cast<size_t>(e) * nodes_per_elem(),
            static_cast<size_t>(nodes_per_elem())};
  }
};

inline constexpr int faces_per_elem(int dim) { return 2 * dim; }

// Face parametrizations of the unit cell. In 2D the parameter s in [0,1]
// walks each face counterclockwise, so the outward normal of a tangent t is
// (t_y, -t_x). Faces: 0 bottom, 1 right, 2 top, 3 left.
inline Vec<2> face_point(int face, const Vec<1>& s) {
  switch (face) {
    case 0: return {s[0], 0.0};
    case 1: return {1.0, s[0]};
    case 2: return {1.0 - s[0], 1.0};
    default: return {0.0, 1.0 - s[0]};
  }
}

inline std::array<Vec<2>, 1> face_tangent_dirs(int /*dim tag*/, int face,
                                               std::integral_constant<int, 2>) {
  switch (face) {
    case 0: return {Vec<2>{1.0, 0.0}};
    case 1: return {Vec<2>{0.0, 1.0}};
    case 2: return {Vec<2>{-1.0, 0.0}};
    default: return {Vec<2>{0.0, -1.0}};
  }
}

// 3D faces: 0 z=0, 1 z=1, 2 y=0, 3 x=1, 4 y=1, 5 x=0, with (s,t) chosen so
// that d(x)/ds x d(x)/dt points outward.
inline Vec<3> face_point(int face, const Vec<2>& st) {
  double s = st[0], t = st[1];
  switch (face) {
    case 0: return {t, s, 0.0};
    case 1: return {s, t, 1.0};
    case 2: return {s, 0.0, t};
    case 3: return {1.0, s, t};
    case 4: return {t, 1.0, s};
    default: return {0.0, t, s};
  }
}

inline std::array<Vec<3>, 2> face_tangent_dirs(int /*dim tag*/, int face,
                                               std::integral_constant<int, 3>) {
  switch (face) {
    case 0: return {Vec<3>{0, 1, 0}, Vec<3>{1, 0, 0}};
    case 1: return {Vec<3>{1, 0, 0}, Vec<3>{0, 1, 0}};
    case 2: return {Vec<3>{1, 0, 0}, Vec<3>{0, 0, 1}};
    case 3: return {Vec<3>{0, 1, 0}, Vec<3>{0, 0, 1}};
    case 4: return {Vec<3>{0, 0, 1}, Vec<3>{1, 0, 0}};
    default: return {Vec<3>{0, 0, 1}, Vec<3>{0, 1, 0}};
  }
}

template <int D>
inline Vec<D> face_ref_point(int face, const Vec<D - 1>& s) {
  return face_point(face, s);
}

// Geometry evaluation against an arbitrary coordinate set (initial or
// current). `coords` is indexed by global node id.
template <int D>
inline Vec<D> map_point(const Mesh<D>& m, std::span<const Vec<D>> coords,
                        int elem, const Vec<D>& xi, const Lagrange1D& basis) {
  int n = m.nodes_per_elem();
  std::vector<double> vals(n);
  tensor_eval<D>(basis, xi, vals);
  auto en = m.elem_nodes(elem);
  Vec<D> x;
  for (int a = 0; a < n; ++a) x += vals[a] * coords[en[a]];
  return x;
}

template <int D>
inline Mat<D> reference_jacobian(const Mesh<D>& m,
                                 std::span<const Vec<D>> coords, int elem,
                                 const Vec<D>& xi, const Lagrange1D& basis) {
  int n = m.nodes_per_elem();
  std::vector<double> vals(n);
  std::vector<Vec<D>> grads(n);
  tensor_eval<D>(basis, xi, vals, grads);
  auto en = m.elem_nodes(elem);
  Mat<D> j;
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < D; ++i)
      for (int d = 0; d < D; ++d) j(i, d) += coords[en[a]][i] * grads[a][d];
  return j;
}

template <int D>
struct FaceFrame {
  Vec<D> point;
  Vec<D> normal;    // unit, outward
  double measure;   // surface Jacobian, d(area)/d(face params)
};

template <int D>
inline FaceFrame<D> face_frame(const Mesh<D>& m, std::span<const Vec<D>> coords,
                               int elem, int face, const Vec<D - 1>& s,
                               const Lagrange1D& basis) {
  Vec<D> xi = face_ref_point<D>(face, s);
  Mat<D> j = reference_jacobian(m, coords, elem, xi, basis);
  FaceFrame<D> f;
  f.point = map_point(m, coords, elem, xi, basis);
  auto dirs = face_tangent_dirs(0, face, std::integral_constant<int, D>{});
  if constexpr (D == 2) {
    Vec<2> t = j * dirs[0];
    f.measure = norm(t);
    f.normal = normalized(Vec<2>{t[1], -t[0]});
  } else {
    Vec<3> t1 = j * dirs[0], t2 = j * dirs[1];
    Vec<3> c{t1[1] * t2[2] - t1[2] * t2[1], t1[2] * t2[0] - t1[0] * t2[2],
             t1[0] * t2[1] - t1[1] * t2[0]};
    f.measure = norm(c);
    f.normal = normalized(c);
  }
  return f;
}

// Newton inversion of the element map. Returns true when it converged and
// the reference point lies in the unit cell (within `slack`).
template <int D>
inline bool invert_map(const Mesh<D>& m, std::span<const Vec<D>> coords,
                       int elem, const Vec<D>& phys, const Lagrange1D& basis,
                       Vec<D>& ref, double slack = 1e-9) {
  Vec<D> xi;
  for (int d = 0; d < D; ++d) xi[d] = 0.5;
  for (int it = 0; it < 50; ++it) {
    Vec<D> r = map_point(m, coords, elem, xi, basis) - phys;
    if (norm(r) < 1e-13) break;
    Mat<D> j = reference_jacobian(m, coords, elem, xi, basis);
    if (std::abs(det(j)) < 1e-300) return false;
    Vec<D> dx = inverse(j) * r;
    for (int d = 0; d < D; ++d) {
      xi[d] -= dx[d];
      xi[d] = std::clamp(xi[d], -0.5, 1.5);
    }
  }
  if (norm(map_point(m, coords, elem, xi, basis) - phys) > 1e-10) return false;
  for (int d = 0; d < D; ++d)
    if (xi[d] < -slack || xi[d] > 1.0 + slack) return false;
  ref = xi;
  return true;
}

// Sum of the axis-aligned bounding box edge lengths times the face count
// per direction pair: 2(dx+dy) in 2D, 4(dx+dy+dz) in 3D.
template <int D>
inline double bounding_box_perimeter(const Mesh<D>& m) {
  Vec<D> lo = m.node.at(0), hi = m.node.at(0);
  for (const auto& p : m.node)
    for (int d = 0; d < D; ++d) {
      lo[d] = std::fmin(lo[d], p[d]);
      hi[d] = std::fmax(hi[d], p[d]);
    }
  double s = 0;
  for (int d = 0; d < D; ++d) s += hi[d] - lo[d];
  return (D == 2 ? 2.0 : 4.0) * s;
}

namespace detail {

// Merges coincident nodes produced by independent block sweeps. Quantized
// hashing with neighbor-cell probing, so points a few ulps apart on either
// side of a rounding boundary still merge.
template <int D>
class NodeDedup {
 public:
  explicit NodeDedup(double tol = 1e-11) : tol_(tol) {}

  int insert(const Vec<D>& p, std::vector<Vec<D>>& nodes) {
    std::array<int64_t, D> base;
    for (int d = 0; d < D; ++d) base[d] = quant(p[d]);
    int probes = 1;
    for (int d = 0; d < D; ++d) probes *= 3;
    for (int m = 0; m < probes; ++m) {
      std::array<int64_t, D> key = base;
      int rem = m;
      for (int d = 0; d < D; ++d) {
        key[d] += rem % 3 - 1;
        rem /= 3;
      }
      auto it = map_.find(key);
      if (it != map_.end() && norm(nodes[it->second] - p) <= tol_)
        return it->second;
    }
    int id = static_cast<int>(nodes.size());
    nodes.push_back(p);
    map_.emplace(base, id);
    return id;
  }

 private:
  struct Hash {
    size_t operator()(const std::array<int64_t, D>& k) const {
      size_t h = 1469598103934665603ull;
      for (auto v : k) {
        h ^= static_cast<size_t>(v);
        h *= 1099511628211ull;
      }
      return h;
    }
  };
  int64_t quant(double x) const {
    return static_cast<int64_t>(std::llround(x / tol_));
  }
  double tol_;
  std::unordered_map<std::array<int64_t, D>, int, Hash> map_;
};

// Corner node ids of a 2D face, lexicographic cell layout.
inline std::array<int, 2> face_corner_ids(int degree, int face) {
  int n = degree + 1;
  switch (face) {
    case 0: return {0, degree};
    case 1: return {degree, n * n - 1};
    case 2: return {n * n - 1, n * (n - 1)};
    default: return {n * (n - 1), 0};
  }
}

// Populates mesh.bdry with all faces that are not shared by two elements.
inline void extract_boundary(Mesh<2>& m) {
  m.bdry.clear();
  std::map<std::pair<int, int>, std::pair<int, int>> seen;
  for (int e = 0; e < m.n_elems(); ++e) {
    auto en = m.elem_nodes(e);
    for (int f = 0; f < 4; ++f) {
      auto c = face_corner_ids(m.geom_degree, f);
      int a = en[c[0]], b = en[c[1]];
      auto key = std::minmax(a, b);
      auto it = seen.find(key);
      if (it == seen.end())
        seen.emplace(key, std::make_pair(e, f));
      else
        it->second.first = -1;
    }
  }
  for (const auto& [key, ef] : seen)
    if (ef.first >= 0) m.bdry.push_back({ef.first, ef.second, 0, true});
  std::sort(m.bdry.begin(), m.bdry.end(), [](const auto& x, const auto& y) {
    return std::tie(x.elem, x.face) < std::tie(y.elem, y.face);
  });
}

// Rejects tangled or inverted cells at construction time.
template <int D>
inline void validate_jacobians(const Mesh<D>& m, const char* who) {
  Lagrange1D basis{lobatto_points(m.geom_degree)};
  auto rule = tensor_rule<D>(gauss_rule(m.geom_degree + 2));
  for (int e = 0; e < m.n_elems(); ++e)
    for (int q = 0; q < rule.size(); ++q) {
      double j = det(reference_jacobian(
          m, std::span<const Vec<D>>(m.node), e, rule.point[q], basis));
      if (!(j > 0.0))
        throw std::invalid_argument(std::string(who) +
                                    ": degenerate or inverted cell");
    }
}

}  // namespace detail

// Structured Cartesian grid on [lo, hi], nx x ny cells of degree k.
// Global node ids follow the row-major node grid, so connectivity rows are
// strictly increasing.
inline Mesh<2> make_cartesian(int nx, int ny, Vec<2> lo, Vec<2> hi,
                              int degree) {
  if (nx < 1 || ny < 1 || degree < 1)
    throw std::invalid_argument("make_cartesian: bad sizes");
  Mesh<2> m;
  m.geom_degree = degree;
  auto pts = lobatto_points(degree);
  int gx = degree * nx + 1, gy = degree * ny + 1;
  double hx = (hi[0] - lo[0]) / nx, hy = (hi[1] - lo[1]) / ny;
  m.node.resize(static_cast<size_t>(gx) * gy);
  auto coord1d = [&](int g, double l, double h, int cells) {
    int c = std::min(g / degree, cells - 1);
    return l + c * h + pts[g - c * degree] * h;
  };
  for (int j = 0; j < gy; ++j)
    for (int i = 0; i < gx; ++i)
      m.node[static_cast<size_t>(j) * gx + i] = {coord1d(i, lo[0], hx, nx),
                                                 coord1d(j, lo[1], hy, ny)};
  m.conn.reserve(static_cast<size_t>(nx) * ny * m.nodes_per_elem());
  for (int cy = 0; cy < ny; ++cy)
    for (int cx = 0; cx < nx; ++cx)
      for (int j = 0; j <= degree; ++j)
        for (int i = 0; i <= degree; ++i)
          m.conn.push_back((cy * degree + j) * gx + cx * degree + i);
  detail::extract_boundary(m);
  return m;
}

// Bilinear image of the unit square; corners counterclockwise from the
// origin corner. Written so identity corners reproduce make_cartesian
// coordinates bitwise.
inline Mesh<2> make_trapezoid(int nx, int ny, const std::array<Vec<2>, 4>& c,
                              int degree) {
  Mesh<2> m = make_cartesian(nx, ny, {0.0, 0.0}, {1.0, 1.0}, degree);
  Vec<2> eu = c[1] - c[0], ev = c[3] - c[0], exy = c[2] - c[1] - (c[3] - c[0]);
  for (auto& p : m.node) {
    double u = p[0], v = p[1];
    p = c[0] + u * eu + v * ev + (u * v) * exy;
  }
  detail::validate_jacobians(m, "make_trapezoid");
  return m;
}

namespace detail {

// Shared block assembler: emit takes (cell-local node grid position) ->
// physical point; one block of bu x bv cells is appended.
inline void append_block(Mesh<2>& m, NodeDedup<2>& dd, int bu, int bv,
                         int degree,
                         const std::function<Vec<2>(double, double)>& map) {
  auto pts = lobatto_points(degree);
  for (int cv = 0; cv < bv; ++cv)
    for (int cu = 0; cu < bu; ++cu)
      for (int j = 0; j <= degree; ++j)
        for (int i = 0; i <= degree; ++i) {
          double u = (cu + pts[i]) / bu;
          double v = (cv + pts[j]) / bv;
          m.conn.push_back(dd.insert(map(u, v), m.node));
        }
}

}  // namespace detail

// Five-block butterfly disc of radius R centered at the origin: a central
// square of half-width R/2 and four transfinite collar blocks blending the
// square edges onto the circle. n_azi cells around the circumference
// (multiple of 4), n_rad radial layers in the collar. Boundary nodes land
// exactly on the circle.
inline Mesh<2> make_disc(int n_rad, int n_azi, double radius, int degree) {
  if (degree < 2)
    throw std::invalid_argument("make_disc: curved wall needs degree >= 2");
  if (n_rad < 1 || n_azi < 4 || n_azi % 4 != 0)
    throw std::invalid_argument("make_disc: n_azi must be a multiple of 4");
  int ns = n_azi / 4;
  double s = 0.5 * radius;
  Mesh<2> m;
  m.geom_degree = degree;
  detail::NodeDedup<2> dd(1e-11 * radius);
  detail::append_block(m, dd, ns, ns, degree, [&](double u, double v) {
    return Vec<2>{-s + 2.0 * s * u, -s + 2.0 * s * v};
  });
  for (int q = 0; q < 4; ++q) {
    // Collar block of quadrant q: u walks the square edge top-down (so the
    // (u,v) frame is right-handed with v pointing outward), v blends the
    // straight edge onto the arc.
    double ca = (q == 0) ? 1 : (q == 2) ? -1 : 0;
    double sa = (q == 1) ? 1 : (q == 3) ? -1 : 0;
    detail::append_block(m, dd, ns, n_rad, degree, [&](double u, double v) {
      Vec<2> inner{s, s - 2.0 * s * u};
      double th = (0.25 - 0.5 * u) * M_PI;
      Vec<2> outer{radius * std::cos(th), radius * std::sin(th)};
      Vec<2> p = (1.0 - v) * inner + v * outer;
      return Vec<2>{ca * p[0] - sa * p[1], sa * p[0] + ca * p[1]};
    });
  }
  detail::extract_boundary(m);
  detail::validate_jacobians(m, "make_disc");
  return m;
}

enum class HoleShape { circle, rotated_square };

struct HoleParams {
  HoleShape shape = HoleShape::circle;
  Vec<2> center{0.5, 0.5};
  double radius = 0.15;      // circle radius or square half-width
  double angle = M_PI / 4;   // rotation of the square hole
};

// Ring mesh between the unit square and an interior hole. The perimeter
// parameter u in [0,4) walks both loops counterclockwise starting at the
// origin corner; radial lines blend from the hole boundary (v=0) to the
// outer square (v=1). n_side cells per outer side, n_rad radial layers.
// Hole-boundary faces carry tag 1, outer faces tag 0.
inline Mesh<2> make_square_with_hole(const HoleParams& hp, int n_side,
                                     int n_rad, int degree) {
  if (n_side < 1 || n_rad < 1)
    throw std::invalid_argument("make_square_with_hole: bad sizes");
  auto outer = [](double u) -> Vec<2> {
    int side = static_cast<int>(u) % 4;
    double f = u - std::floor(u);
    switch (side) {
      case 0: return {f, 0.0};
      case 1: return {1.0, f};
      case 2: return {1.0 - f, 1.0};
      default: return {0.0, 1.0 - f};
    }
  };
  // Hole parametrized by the same angular walk as the outer loop (u=0
  // points from the hole center toward the origin corner), so the radial
  // blend lines never twist and cells stay valid at any rotation. The
  // square hole is the ray-cast onto the rotated square: its corners land
  // at parameter u = frac(2*angle/pi) + k and are represented exactly
  // whenever those parameters hit radial mesh lines (n_side * frac a whole
  // number, e.g. even n_side at the default 45-degree rotation); otherwise
  // the quadratic edge shaves the corner.
  auto inner = [&](double u) -> Vec<2> {
    double th = -0.75 * M_PI + u * 0.5 * M_PI;
    double r = hp.radius;
    if (hp.shape == HoleShape::rotated_square) {
      double c = std::cos(th - hp.angle), s = std::sin(th - hp.angle);
      r /= std::fmax(std::abs(c), std::abs(s));
    }
    return hp.center + r * Vec<2>{std::cos(th), std::sin(th)};
  };
  double rim = hp.radius * (hp.shape == HoleShape::circle ? 1.0 : M_SQRT2);
  double wall_dist = std::min(std::min(hp.center[0], 1.0 - hp.center[0]),
                              std::min(hp.center[1], 1.0 - hp.center[1]));
  if (!(rim > 0.0) || rim > 0.8 * wall_dist)
    throw std::invalid_argument(
        "make_square_with_hole: hole must sit strictly inside the square");
  Mesh<2> m;
  m.geom_degree = degree;
  detail::NodeDedup<2> dd(1e-12);
  for (int side = 0; side < 4; ++side)
    detail::append_block(m, dd, n_side, n_rad, degree, [&](double u, double v) {
      double uu = side + u;
      return (1.0 - v) * outer(uu) + v * inner(uu);
    });
  detail::extract_boundary(m);
  Lagrange1D basis{lobatto_points(degree)};
  for (auto& bf : m.bdry) {
    auto fr = face_frame(m, std::span<const Vec<2>>(m.node), bf.elem, bf.face,
                         Vec<1>{0.5}, basis);
    bf.tag = (norm(fr.point - hp.center) < 0.5 * (rim + wall_dist)) ? 1 : 0;
  }
  detail::validate_jacobians(m, "make_square_with_hole");
  return m;
}

// Plain-text serialization. Header: dim geom_degree n_nodes n_elems n_bdry.
// Doubles print with 17 significant digits, so write -> read -> write is
// byte-identical.
template <int D>
inline std::string write_mesh_text(const Mesh<D>& m) {
  std::ostringstream os;
  char buf[32];
  os << D << ' ' << m.geom_degree << ' ' << m.n_nodes() << ' ' << m.n_elems()
     << ' ' << m.bdry.size() << '\n';
  for (const auto& p : m.node) {
    for (int d = 0; d < D; ++d) {
      std::snprintf(buf, sizeof buf, "%.17g", p[d]);
      os << (d ? " " : "") << buf;
    }
    os << '\n';
  }
  int npe = m.nodes_per_elem();
  for (int e = 0; e < m.n_elems(); ++e) {
    auto en = m.elem_nodes(e);
    for (int a = 0; a < npe; ++a) os << (a ? " " : "") << en[a];
    os << '\n';
  }
  for (const auto& b : m.bdry)
    os << b.elem << ' ' << b.face << ' ' << b.tag << '\n';
  return os.str();
}

template <int D>
inline void write_mesh(const Mesh<D>& m, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_mesh: cannot open " + path);
  f << write_mesh_text(m);
}

template <int D>
inline Mesh<D> read_mesh_text(std::istream& is) {
  Mesh<D> m;
  int dim = 0, nn = 0, ne = 0, nb = 0;
  if (!(is >> dim >> m.geom_degree >> nn >> ne >> nb))
    throw std::runtime_error("read_mesh: malformed header");
  if (dim != D) throw std::runtime_error("read_mesh: dimension mismatch");
  if (m.geom_degree < 1 || nn < 0 || ne < 0 || nb < 0)
    throw std::runtime_error("read_mesh: malformed header");
  m.node.resize(nn);
  for (auto& p : m.node)
    for (int d = 0; d < D; ++d)
      if (!(is >> p[d])) throw std::runtime_error("read_mesh: bad node row");
  m.conn.resize(static_cast<size_t>(ne) * m.nodes_per_elem());
  for (auto& c : m.conn) {
    if (!(is >> c) || c < 0 || c >= nn)
      throw std::runtime_error("read_mesh: bad connectivity");
  }
  m.bdry.resize(nb);
  for (auto& b : m.bdry) {
    if (!(is >> b.elem >> b.face >> b.tag) || b.elem < 0 || b.elem >= ne ||
        b.face < 0 || b.face >= faces_per_elem(D))
      throw std::runtime_error("read_mesh: bad boundary row");
    b.wall = true;
  }
  return m;
}

template <int D>
inline Mesh<D> read_mesh(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_mesh: cannot open " + path);
  return read_mesh_text<D>(f);
}

}  // namespace lagwall
