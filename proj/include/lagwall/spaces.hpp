#pragma once

#include <stdexcept>

#include "lagwall/basis.hpp"
#include "lagwall/mesh.hpp"

namespace lagwall {

// Function-space pair of the semi-discretization: a continuous kinematic
// space of degree k on Gauss-Lobatto nodes (isoparametric with the mesh,
// so kinematic coefficients of position are node coordinates) and a
// discontinuous thermodynamic space of degree k-1 on interior Gauss nodes,
// element-local.
template <int D>
struct Spaces {
  int order = 1;      // kinematic degree k
  Lagrange1D kin;     // degree k, Lobatto layout
  Lagrange1D thermo;  // degree k-1, Gauss layout

  int kin_per_elem() const {
    int n = 1;
    for (int d = 0; d < D; ++d) n *= order + 1;
    return n;
  }
  int thermo_per_elem() const {
    int n = 1;
    for (int d = 0; d < D; ++d) n *= order;
    return n;
  }
  int n_kin(const Mesh<D>& m) const { return m.n_nodes(); }
  int n_thermo(const Mesh<D>& m) const {
    return m.n_elems() * thermo_per_elem();
  }
  int thermo_dof(int elem, int local) const {
    return elem * thermo_per_elem() + local;
  }
};

template <int D>
inline Spaces<D> build_spaces(const Mesh<D>& mesh, int order) {
  if (order < 1) throw std::invalid_argument("build_spaces: order >= 1");
  if (order != mesh.geom_degree)
    throw std::invalid_argument(
        "build_spaces: kinematic order must match the mesh geometry degree");
  Spaces<D> s;
  s.order = order;
  s.kin = Lagrange1D{lobatto_points(order)};
  s.thermo = Lagrange1D{gauss_points(order)};
  return s;
}

// Pointwise interpolation. Kinematic coefficient vectors interleave vector
// components (node*D + i); thermodynamic vectors are element-blocked.

template <int D>
inline double interp_kin_scalar(const Mesh<D>& m, const Spaces<D>& s,
                                std::span<const double> coeff, int elem,
                                const Vec<D>& xi) {
  int n = s.kin_per_elem();
  std::vector<double> vals(n);
  tensor_eval<D>(s.kin, xi, vals);
  auto en = m.elem_nodes(elem);
  double r = 0;
  for (int a = 0; a < n; ++a) r += vals[a] * coeff[en[a]];
  return r;
}

template <int D>
inline Vec<D> interp_kin_vec(const Mesh<D>& m, const Spaces<D>& s,
                             std::span<const double> coeff, int elem,
                             const Vec<D>& xi) {
  int n = s.kin_per_elem();
  std::vector<double> vals(n);
  tensor_eval<D>(s.kin, xi, vals);
  auto en = m.elem_nodes(elem);
  Vec<D> r;
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < D; ++i) r[i] += vals[a] * coeff[en[a] * D + i];
  return r;
}

template <int D>
inline double interp_thermo(const Spaces<D>& s, std::span<const double> coeff,
                            int elem, const Vec<D>& xi) {
  int n = s.thermo_per_elem();
  std::vector<double> vals(n);
  tensor_eval<D>(s.thermo, xi, vals);
  double r = 0;
  for (int l = 0; l < n; ++l) r += vals[l] * coeff[s.thermo_dof(elem, l)];
  return r;
}

// Nodal interpolant of an analytic function into the kinematic space.
template <int D, class F>
inline std::vector<double> project_kin_nodal(const Mesh<D>& m, F&& f) {
  std::vector<double> c(m.n_nodes());
  for (int i = 0; i < m.n_nodes(); ++i) c[i] = f(m.node[i]);
  return c;
}

}  // namespace lagwall
