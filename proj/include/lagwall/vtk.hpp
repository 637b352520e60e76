#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "integrator.hpp"
#include "mesh.hpp"
#include "spaces.hpp"

namespace lagwall {

// Legacy-ASCII unstructured-grid snapshot. Each element contributes its
// (k+1)^2 kinematic nodes as independent points (fields stay discontinuous
// across element interfaces) and k x k bilinear visualization cells. Point
// fields: velocity magnitude, density from the pointwise mass balance
// rho0 J0 / J, and log10(density). Output bytes are deterministic for a
// fixed state.
template <int D>
inline void write_vtk(const std::string& path, const Mesh<D>& mesh,
                      const Spaces<D>& spaces, const HydroState<D>& s,
                      const std::function<double(const Vec<D>&)>& rho0 = {}) {
  static_assert(D == 2, "snapshot writer covers plane flows");
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("write_vtk: cannot open '" + path + "'");
  auto density0 = rho0 ? rho0 : [](const Vec<D>&) { return 1.0; };

  int k = spaces.order;  // == mesh.geom_degree (isoparametric)
  Lagrange1D geom{lobatto_points(k)};
  int npe = mesh.nodes_per_elem();
  int ne = mesh.n_elems();
  long npoints = long(ne) * npe;
  auto pts = lobatto_points(k);

  std::vector<Vec<D>> cur(mesh.n_nodes());
  for (int i = 0; i < mesh.n_nodes(); ++i)
    for (int d = 0; d < D; ++d) cur[i][d] = s.x[size_t(i) * D + d];
  std::span<const Vec<D>> curs(cur), X0(mesh.node);

  std::fprintf(f, "# vtk DataFile Version 3.0\n");
  std::fprintf(f, "lagwall fields t=%.17g\n", s.t);
  std::fprintf(f, "ASCII\nDATASET UNSTRUCTURED_GRID\n");
  std::fprintf(f, "POINTS %ld double\n", npoints);
  for (int el = 0; el < ne; ++el) {
    auto en = mesh.elem_nodes(el);
    for (int a = 0; a < npe; ++a) {
      const Vec<D>& p = cur[en[a]];
      std::fprintf(f, "%.9g %.9g 0\n", p[0], p[1]);
    }
  }

  long ncells = long(ne) * k * k;
  std::fprintf(f, "CELLS %ld %ld\n", ncells, 5 * ncells);
  for (int el = 0; el < ne; ++el) {
    long base = long(el) * npe;
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < k; ++i) {
        long p00 = base + long(j) * (k + 1) + i;
        std::fprintf(f, "4 %ld %ld %ld %ld\n", p00, p00 + 1, p00 + k + 2,
                     p00 + k + 1);
      }
  }
  std::fprintf(f, "CELL_TYPES %ld\n", ncells);
  for (long c = 0; c < ncells; ++c) std::fprintf(f, "9\n");

  // Nodal density via the deformation ratio at each kinematic node.
  size_t npts = size_t(npoints);
  std::vector<double> dens(npts), vmag(npts);
  for (int el = 0; el < ne; ++el) {
    auto en = mesh.elem_nodes(el);
    for (int a = 0; a < npe; ++a) {
      Vec<D> xi{pts[a % (k + 1)], pts[a / (k + 1)]};
      double j0 = det(reference_jacobian(mesh, X0, el, xi, geom));
      double jc = det(reference_jacobian(mesh, curs, el, xi, geom));
      Vec<D> p0 = mesh.node[en[a]];
      dens[size_t(el) * npe + a] = density0(p0) * j0 / jc;
      double vv = 0;
      for (int d = 0; d < D; ++d) {
        double c = s.v[size_t(en[a]) * D + d];
        vv += c * c;
      }
      vmag[size_t(el) * npe + a] = std::sqrt(vv);
    }
  }

  std::fprintf(f, "POINT_DATA %ld\n", npoints);
  std::fprintf(f, "SCALARS velocity_magnitude double 1\nLOOKUP_TABLE default\n");
  for (long i = 0; i < npoints; ++i) std::fprintf(f, "%.9g\n", vmag[size_t(i)]);
  std::fprintf(f, "SCALARS density double 1\nLOOKUP_TABLE default\n");
  for (long i = 0; i < npoints; ++i) std::fprintf(f, "%.9g\n", dens[size_t(i)]);
  std::fprintf(f, "SCALARS log10_density double 1\nLOOKUP_TABLE default\n");
  for (long i = 0; i < npoints; ++i)
    std::fprintf(f, "%.9g\n", std::log10(std::fmax(dens[size_t(i)], 1e-300)));
  if (std::fclose(f) != 0)
    throw std::runtime_error("write_vtk: write failed for '" + path + "'");
}

}  // namespace lagwall
